"""LangGraph workflow definitions for tonebif."""

"""Tests for LangGraph workflows."""

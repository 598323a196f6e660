"""Tests for the FastAPI surface."""

"""Tests for the reference notes."""

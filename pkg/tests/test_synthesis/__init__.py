"""Tests for additive synthesis and verification."""

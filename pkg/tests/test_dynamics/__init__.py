"""Tests for the amplitude dynamics integrators and closed forms."""

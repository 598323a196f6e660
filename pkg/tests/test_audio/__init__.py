"""Tests for WAV input and output."""

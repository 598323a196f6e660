"""Tests for equilibria, transition varieties and reports."""

"""Tests for the bifurcation-parameter controller."""

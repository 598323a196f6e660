"""Tests for spectral analysis and envelope segmentation."""

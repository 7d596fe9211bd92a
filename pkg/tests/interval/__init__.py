"""Tests for interval bases."""

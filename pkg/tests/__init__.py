"""Tests for the interval wavelets library."""

DESK_WAVE_NUMBER = 100

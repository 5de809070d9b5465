"""Tests for the scanemu package."""

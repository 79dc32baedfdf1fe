"""Tests for qmask."""

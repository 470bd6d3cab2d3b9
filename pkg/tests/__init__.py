"""Tests for the du-opacity checker."""

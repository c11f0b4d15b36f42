"""Tests for models."""


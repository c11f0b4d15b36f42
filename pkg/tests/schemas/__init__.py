"""Tests for Pydantic schemas."""


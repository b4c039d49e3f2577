"""Test suite for wtopics."""

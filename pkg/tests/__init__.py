"""Test suite for igep-scenarios."""

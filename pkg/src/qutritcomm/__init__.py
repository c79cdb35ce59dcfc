"""Qutritcomm - Simulate three-party single-qutrit communication protocols."""

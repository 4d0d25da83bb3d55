"""Shared core utilities for menroll"""

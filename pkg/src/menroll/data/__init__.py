"""Bundled scenario fixtures"""

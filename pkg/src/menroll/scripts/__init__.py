"""
menroll scripts
"""

"""Device parameter records, physics helpers and constraint generators"""

"""Time grids, profiles, forecasts and scenario documents"""

"""Experiment matrix, reports and plot data"""

"""Day-ahead scheduling and intra-day rolling adjustment"""

"""Mixed-integer linear programming core"""

"""
Web-session clustering: log preprocessing, five clustering techniques,
cluster validity indices and the sweep harness that compares them.
"""

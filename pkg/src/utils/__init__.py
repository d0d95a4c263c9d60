"""
Shared helpers of the workbench.
"""

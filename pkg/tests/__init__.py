"""
Tests package for MTI.
"""

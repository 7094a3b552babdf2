"""
Generated-graph export command.
"""
from flask import Blueprint

diffuse_bp = Blueprint('diffuse', __name__, cli_group=None)

from . import commands

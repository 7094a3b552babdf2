"""
Case-study similarity command.
"""
from flask import Blueprint

inspect_bp = Blueprint('inspect', __name__, cli_group=None)

from . import commands

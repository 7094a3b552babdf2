"""
Evaluation command.
"""
from flask import Blueprint

evaluate_bp = Blueprint('evaluate', __name__, cli_group=None)

from . import commands

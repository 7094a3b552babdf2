"""
Synthetic dataset command.
"""
from flask import Blueprint

synth_bp = Blueprint('synth', __name__, cli_group=None)

from . import commands

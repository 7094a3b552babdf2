"""
Training command.
"""
from flask import Blueprint

train_bp = Blueprint('train', __name__, cli_group=None)

from . import commands

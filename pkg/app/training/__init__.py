"""
Training: hyperparameters, sampling, losses, the epoch schedule and checkpoints.
"""

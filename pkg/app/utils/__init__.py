"""
Utils package
"""

from app.utils.profiles import eval_profile, l1_distance, mass, total_variation

__all__ = [
    'eval_profile',
    'l1_distance',
    'mass',
    'total_variation',
]

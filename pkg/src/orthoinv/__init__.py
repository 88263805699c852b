"""Rational invariants of the orthogonal group acting on even-degree forms.

A form is rotated into a slice of forms with diagonal quadratic part; there
the residual symmetry is the signed permutation group, whose generating
invariants are evaluated exactly (rationals) or in double precision.
"""

from .forms import (Form, OrthogonalMatrix, apply_orthogonal, enumerate_multi_indices,
                    enumerate_partitions, format_form, laplacian, laplacian_power,
                    mul_norm_power, multinomial, parse_form)
from .invariants import (DEFAULT, PAPER_LITERAL, Fingerprint, InvariantVariant, compare,
                         emit_generators, fingerprint, reconstruct)
from .oracle import SignedPermutation, act_coords, act_form, enumerate_group
from .slice import (SliceBasis, SliceCoordinates, build_basis, coordinates, diagonalize,
                    is_in_slice, move_to_slice, quadratic_part)

__version__ = "0.1.0"

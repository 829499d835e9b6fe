"""NTRU public-key expansion and butterfly-style pseudonym certificates."""

from ._backend import active_backend, available_backends, use_backend
from .cert_scheme import (
    IntegrityFailure,
    PseudonymCertificate,
    decrypt_certificate,
    encrypt_certificate,
)
from .key_expansion import ExpandedPublicKey, ExpanderRole, expand_key, sample_expander
from .ntru_core import PrivateKey, PublicKey, decrypt, encrypt, keygen
from .poly_ring import PRESETS, NtruParams, RingElement, preset
from .protocol import run_flow

__version__ = "0.1.0"

__all__ = [
    "ExpandedPublicKey",
    "ExpanderRole",
    "IntegrityFailure",
    "NtruParams",
    "PRESETS",
    "PrivateKey",
    "PseudonymCertificate",
    "PublicKey",
    "RingElement",
    "active_backend",
    "available_backends",
    "decrypt",
    "decrypt_certificate",
    "encrypt",
    "encrypt_certificate",
    "expand_key",
    "keygen",
    "preset",
    "run_flow",
    "sample_expander",
    "use_backend",
]

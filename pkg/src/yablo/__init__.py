"""Proof kernel, numeric coding, and modal validity oracle for arithmetized
non-wellfounded self-reference."""

__version__ = "0.1.0"

"""Prior-free compression protocols on small alphabets, with exact cost metering."""
__version__ = "0.1.0"

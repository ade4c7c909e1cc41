"""User-sovereign personal-data agent suite: browsing captures in,
multi-granularity datasets out, served strictly under user-approved scopes."""

__version__ = "0.1.0"

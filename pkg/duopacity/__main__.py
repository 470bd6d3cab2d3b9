"""Allow ``python -m duopacity``."""

from .cli import main

main()

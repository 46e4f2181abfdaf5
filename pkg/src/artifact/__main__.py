"""Run the command-line front end with ``python3 -m artifact``."""

from .cli import main_entry

main_entry()

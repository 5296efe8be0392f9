"""``python -m urbanca`` entry point."""
from .cli import main

main()

from .cli import app, main

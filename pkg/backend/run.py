"""
Run the spin amplification CLI
"""

from app.main import cli

if __name__ == "__main__":
    cli()

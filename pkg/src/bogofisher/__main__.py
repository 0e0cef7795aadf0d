"""Allow ``python -m bogofisher``."""

from .cli import main

if __name__ == "__main__":
    main()

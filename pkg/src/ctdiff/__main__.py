import sys

from ctdiff.cli import main

if __name__ == "__main__":
    sys.exit(main())

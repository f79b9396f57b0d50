"""Process entry point for the benchmark runner.

Equivalent to the ``dp-sco-bench`` console script:

    python src/main.py run --config experiments/noisy_md.json --jobs 4
"""

import sys

from dp_sco_toolkit.handlers.cli_handler import main

if __name__ == "__main__":
    sys.exit(main())

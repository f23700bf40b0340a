#!/usr/bin/env python3
"""
Main script for discrete fractional Sturm-Liouville experiments.
This script performs the following steps:
1. Configure logging from the environment
2. Parse the command line and the TOML experiment document
3. Run the requested command and write its artifacts
4. Report the exit status

Usage:
    python main.py <kernels|opmat|verify|eig|compare|sweep> --config <path> [--strict] [--out <dir>]
"""

import sys
import logging

import cli
from config import configure_logging

logger = logging.getLogger(__name__)


def main(argv=None):
    """Main function to orchestrate an experiment run"""
    # Step 1: Configure logging
    configure_logging()

    # Steps 2-3: Parse and run
    logger.info("Starting DFSL experiment")
    try:
        status = cli.main(argv)
    except Exception as e:
        logger.error(f"Unexpected error: {e}")
        return cli.EXIT_FAILED

    # Step 4: Report
    if status == cli.EXIT_OK:
        logger.info("PROCESS COMPLETED SUCCESSFULLY!")
    else:
        logger.error(f"Process finished with exit status {status}")
    return status


if __name__ == "__main__":
    sys.exit(main())

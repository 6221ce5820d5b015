#!/usr/bin/env python3
"""igep-scenarios - scenario sets from point-forecast ensembles."""

from igep_scenarios.main import main

if __name__ == "__main__":
    raise SystemExit(main())

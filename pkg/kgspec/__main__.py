#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""python -m kgspec で実行スクリプトを起動"""

from .harness_cli import main

if __name__ == "__main__":
    exit(main())

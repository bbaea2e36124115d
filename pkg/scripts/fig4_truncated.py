"""Staircase for the truncated pulse pair (window T = 7 tau).

Same analysis as fig3_staircase.py; compare its midpoint table with the
sigmoid run to see how much the sudden switch-on costs.
"""

from fig3_staircase import main as staircase_main

if __name__ == "__main__":
    staircase_main("fig4_truncated.json")

"""
Command groups for the amplification lab CLI.
"""

from .checks import selftest_command, verify_order_command
from .counting import count_command, delta_scan_command, scan_count_command
from .hecke import tree_check_command
from .amplifier import amplifier_command, efficiency_command, sweep_command, technical_sum_command
from .window import envelope_command, plan_command, window_command

COMMANDS = [
    verify_order_command,
    count_command,
    scan_count_command,
    delta_scan_command,
    tree_check_command,
    amplifier_command,
    sweep_command,
    technical_sum_command,
    efficiency_command,
    window_command,
    plan_command,
    envelope_command,
    selftest_command,
]

__all__ = ['COMMANDS']

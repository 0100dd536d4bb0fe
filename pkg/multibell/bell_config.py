"""Run-wide configuration shared by the CLI, the pipeline, and output helpers."""

from pathlib import Path


class BellConfig:
    """Class for managing attributes that need to be shared across a run.

    The CLI sets these once per invocation. Library modules never read them; only
    output and logging helpers do.

    Attributes:
    - out_dir: directory for results and logs
    - output_format: json, csv, or table
    - seed: global seed, used when a command doesn't get a more specific one
    - log_output: write a log file for this run
    - log_path: path of the current log file, once logging has started
    - unit_testing: suppress log files during tests
    """

    def __init__(self):
        self.out_dir = Path(".")
        self.output_format = "json"
        self.seed = 1
        self.log_output = False
        self.log_path = None
        self.unit_testing = False

    def reset(self):
        """Restore defaults. Tests call this between CLI invocations."""
        self.__init__()


bell_config = BellConfig()

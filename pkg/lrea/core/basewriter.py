"""BaseWriter is the base class for all writer blocks."""
import contextlib
import logging
import os
import sys
from pathlib import Path

import colorama

from lrea.core.block import Block
from lrea.core.files import STDIN, Files


def resolve_color(color):
    """Return whether to print ANSI colors; `auto` means only when sys.stdout is a console."""
    if color == 'auto':
        color = sys.stdout.isatty()
    if color:
        colorama.just_fix_windows_console()
        # termcolor would disable colors on a pipe, `color=1` must win
        os.environ["FORCE_COLOR"] = "1"
    return bool(color)


class BaseWriter(Block):
    """Base class for blocks which print reports or data.

    Subclasses simply print. With `files=-` (the default) the output goes to the
    current `sys.stdout`; otherwise each processed dataset is printed to the next
    of the given files (parent directories are created).
    """

    def __init__(self, files=STDIN, encoding='utf-8', **kwargs):
        super().__init__(**kwargs)
        self.targets = Files(files).filenames
        self.encoding = encoding
        self.datasets_written = 0

    def apply_on_dataset(self, dataset):
        with self.output():
            super().apply_on_dataset(dataset)

    @contextlib.contextmanager
    def output(self):
        """Redirect sys.stdout to the file for the current dataset."""
        target = self._next_target()
        if target == STDIN:
            yield
            return
        path = Path(target)
        path.parent.mkdir(parents=True, exist_ok=True)
        logging.info('%s writes to %s', self.block_name(), path)
        with open(path, 'wt', encoding=self.encoding) as out, contextlib.redirect_stdout(out):
            yield

    def _next_target(self):
        if self.targets == [STDIN]:
            return STDIN
        if self.datasets_written >= len(self.targets):
            raise RuntimeError(f"{self.block_name()} got more datasets than output files "
                               f"({','.join(self.targets)})")
        self.datasets_written += 1
        return self.targets[self.datasets_written - 1]

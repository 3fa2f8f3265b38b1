"""Queue of behavior-log and request files read by lrea blocks."""
import bz2
import glob
import gzip
import io
import lzma
import sys

OPENERS = {'.gz': gzip.open, '.xz': lzma.open, '.bz2': bz2.open}
STDIN = '-'
HANDLE = '<filehandle_input>'


def _names(spec):
    """`a.tsv,b.tsv.gz` or `a.tsv b.tsv`; a leading `!` makes the token a sorted wildcard."""
    for token in spec.replace(',', ' ').split():
        if not token.startswith('!'):
            yield token
            continue
        matched = sorted(glob.glob(token[1:]))
        if not matched:
            raise FileNotFoundError(f'No files match the pattern {token[1:]!r}')
        yield from matched


class Files(object):
    """Opens the given files one after another, `-` being the standard input.

    >>> Files('train.tsv.gz,!logs/day??.tsv')
    >>> Files(['a.tsv', 'b.tsv'])
    >>> Files(filehandle=io.StringIO(text))
    """

    def __init__(self, filenames=None, filehandle=None, encoding='utf-8'):
        self.encoding = encoding
        self.filehandle = filehandle
        self.position = 0
        if filehandle is not None:
            if filenames is not None:
                raise ValueError('Give either files or a filehandle, not both')
            self.filenames = [HANDLE]
        elif isinstance(filenames, (list, tuple)):
            self.filenames = list(filenames)
        elif isinstance(filenames, str) and filenames.strip():
            self.filenames = list(_names(filenames))
        else:
            raise ValueError(f'No input files given (files={filenames!r})')

    @property
    def filename(self):
        """Name of the file opened last, None before the first and after the last one."""
        if 0 < self.position <= len(self.filenames):
            return self.filenames[self.position - 1]
        return None

    def has_next_file(self):
        return self.position < len(self.filenames)

    def next_filehandle(self):
        """Open the next file in text mode; None when the queue is exhausted."""
        self.position += 1
        name = self.filename
        if name is None:
            self.filehandle = None
        elif name == STDIN:
            self.filehandle = io.TextIOWrapper(sys.stdin.buffer, encoding=self.encoding)
        elif name != HANDLE:
            suffix = name[name.rfind('.'):] if '.' in name else ''
            self.filehandle = OPENERS.get(suffix, open)(name, 'rt', encoding=self.encoding)
        return self.filehandle

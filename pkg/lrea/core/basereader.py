"""BaseReader is the base class for all reader blocks."""
import logging

from lrea.core.block import Block
from lrea.core.files import Files


class BaseReader(Block):
    """Base class for reader blocks, which fill the (empty) Dataset of a scenario round.

    Parameters:
    files: input files, see lrea.core.files.Files
    merge: load all files into one dataset (default), otherwise one file per round
    max_examples: stop after this many examples (0 means no limit)
    """

    def __init__(self, files='-', filehandle=None, encoding='utf-8', merge=True, max_examples=0, **kwargs):
        super().__init__(**kwargs)
        if filehandle is not None:
            files = None
        self.files = Files(filenames=files, filehandle=filehandle, encoding=encoding)
        self.merge = merge
        self.max_examples = max_examples
        self.finished = False

    @property
    def filehandle(self):
        return self.files.filehandle

    @property
    def filename(self):
        return self.files.filename

    def next_filehandle(self):
        return self.files.next_filehandle()

    def read_examples(self):
        """Yield the Examples of self.filehandle.

        This method must be overriden in all file readers.
        """
        raise NotImplementedError("Class %s doesn't implement read_examples" % self.__class__.__name__)

    def process_dataset(self, dataset):
        if dataset:
            raise RuntimeError(f"{self.block_name()} must come before any block producing examples")
        loaded_from = []
        while True:
            if self.next_filehandle() is None:
                self.finished = True
                break
            loaded_from.append(self.filename)
            for example in self.read_examples():
                if self.max_examples and len(dataset) >= self.max_examples:
                    self.finished = True
                    break
                dataset.append(example)
            if self.filename not in ('-', '<filehandle_input>'):
                self.filehandle.close()
            if self.finished or not self.merge:
                self.finished = self.finished or not self.files.has_next_file()
                break
        dataset.meta['loaded_from'] = ','.join(loaded_from)
        logging.info('%s loaded %d examples from %s', self.block_name(), len(dataset),
                     dataset.meta['loaded_from'] or 'no files')

"""Score is a block which answers candidate-scoring requests from the state store."""
from lrea.block.read.tsv import MalformedLineError
from lrea.core.basewriter import BaseWriter
from lrea.core.checkpoint import params_for
from lrea.core.files import Files
from lrea.core.serving import ScoreRequest, score
from lrea.core.store import StateStore


def read_requests(filename):
    """Parse a request file, one `user_id<TAB>candidates[<TAB>side]` request per line."""
    files = Files(filename)
    handle = files.next_filehandle()
    requests = []
    try:
        for line_number, line in enumerate(handle, 1):
            if not line.strip():
                continue
            try:
                requests.append(ScoreRequest.from_line(line))
            except ValueError as err:
                raise MalformedLineError(filename, line_number, err) from None
    finally:
        if filename != '-':
            handle.close()
    return requests


class Score(BaseWriter):
    """Print the click probabilities of every request, tab-separated in candidate order.

    Only the cached d×r states (and short sequences) of the store are used,
    raw long sequences are never read.
    """

    def __init__(self, requests, store=None, checkpoint=None, precision=64, **kwargs):
        """Create the Score block object.

        Args:
        requests: request file
        store: state store directory (default: the one built by a previous serve.Precompute)
        checkpoint: the checkpoint the store was built for (default: the model of a previous block)
        precision: 32 or 64 bit arithmetic
        """
        super().__init__(**kwargs)
        self.requests = requests
        self.store = store
        self.checkpoint = checkpoint
        self.precision = precision

    def process_dataset(self, dataset):
        params = params_for(dataset, self.checkpoint, self.precision)
        store = StateStore(self.store) if self.store else dataset.meta.get('store')
        if store is None:
            raise ValueError('No state store: give store=path or run serve.Precompute first')
        for request in read_requests(self.requests):
            print('\t'.join(f"{p:.8f}" for p in score(request, store, params)))

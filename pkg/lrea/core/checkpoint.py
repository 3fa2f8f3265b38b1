"""Self-describing JSON checkpoint of LreaParams."""
import json
import logging
from pathlib import Path

import numpy as np

from lrea.core.config import ModelConfig
from lrea.core.matrix import Matrix
from lrea.core.model import LreaParams

FORMAT = 'lrea-checkpoint/1'


def checkpoint_string(params, meta=None):
    """Serialize `params` (always as float64) into a deterministic JSON string."""
    tensors = [{'name': name, 'shape': [tensor.rows, tensor.cols],
                'data': np.asarray(tensor.data, dtype=np.float64).ravel().tolist()}
               for name, tensor in params.items()]
    document = {'format': FORMAT, 'params_version': params.version,
                'config': params.config.as_dict(), 'meta': meta or {}, 'tensors': tensors}
    return json.dumps(document) + '\n'


def save_checkpoint(params, path, meta=None):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as checkpoint_file:
        checkpoint_file.write(checkpoint_string(params, meta))
    logging.info('Saved checkpoint %s (params version %s)', path, params.version[:12])


def _read_document(path):
    with open(path, encoding='utf-8') as checkpoint_file:
        try:
            return json.load(checkpoint_file)
        except json.JSONDecodeError as err:
            raise ValueError(f"{path} is not a JSON checkpoint: {err}") from err


def load_checkpoint(path, with_meta=False):
    """Load LreaParams; the stored params version is verified against the tensors."""
    document = _read_document(path)
    if document.get('format') != FORMAT:
        raise ValueError(f"{path}: unsupported checkpoint format {document.get('format')!r}")
    config = ModelConfig.from_dict(document['config'])
    tensors = {}
    for entry in document['tensors']:
        rows, cols = entry['shape']
        tensors[entry['name']] = Matrix(np.array(entry['data'], dtype=np.float64).reshape(rows, cols))
    params = LreaParams(config, tensors)
    if params.version != document['params_version']:
        raise ValueError(f"{path}: stored params version {document['params_version'][:12]} "
                         f"does not match the tensors ({params.version[:12]})")
    if with_meta:
        return params, document.get('meta', {})
    return params


def params_for(dataset, path=None, precision=64):
    """Params loaded from the checkpoint `path`, or stored by a previous block in dataset.meta['params']."""
    if path:
        params = load_checkpoint(path)
    elif dataset.meta.get('params') is not None:
        params = dataset.meta['params']
    else:
        raise ValueError('No model: give checkpoint=path or put model.Train earlier in the scenario')
    if precision == 32:
        params = params.astype(np.float32)
    return params


def checkpoint_config(path):
    """Only the ModelConfig of a checkpoint."""
    return ModelConfig.from_dict(_read_document(path)['config'])

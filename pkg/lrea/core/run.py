"""Class Run parses a scenario and executes it."""
import importlib
import logging
import pkgutil
import re

from lrea.core.dataset import Dataset

INT_RE = re.compile(r'[-+]?\d+')
FLOAT_RE = re.compile(r'[-+]?(\d+\.\d*|\.\d+|\d+)([eE][-+]?\d+)?')


def _parse_block_name(block_name):
    """Split `model.Train` into the sub-package path and the class name."""
    names = block_name.split('.')
    if len(names) == 1:
        return '', block_name
    return '.'.join(names[:-1]), names[-1]


def _convert_value(value):
    """Integer and float literals become numbers, anything else stays a string."""
    if INT_RE.fullmatch(value):
        return int(value)
    if FLOAT_RE.fullmatch(value):
        return float(value)
    return value


def _parse_scenario(scenario):
    """Split scenario tokens into a list of block names and a list of their keyword arguments."""
    block_names, block_args = [], []
    for token in scenario:
        logging.debug("Token %s", token)
        if '=' not in token:
            block_names.append(token)
            block_args.append({})
            continue
        # the first '=' separates the name, the value may contain more of them
        name, value = token.split('=', 1)
        if not block_names:
            raise ValueError(f"Block parameter {token!r} without a prior block name")
        block_args[-1][name] = _convert_value(value)
    return block_names, block_args


def _blocks_in_a_package(package_name):
    try:
        package = importlib.import_module(package_name)
    except ImportError:
        return []
    short_name = package_name[len('lrea.block.'):]
    blocks = []
    for submodule in pkgutil.iter_modules(package.__path__):
        try:
            module = importlib.import_module(f"{package_name}.{submodule.name}")
        except ImportError:
            continue
        blocks += [f"{short_name}.{name}" for name in dir(module) if name.lower() == submodule.name]
    return blocks


def _import_block(block_name, kwargs):
    """Import `lrea.block.<path>.<classname lowercased>` and construct the block."""
    sub_path, class_name = _parse_block_name(block_name)
    module_name = f"lrea.block.{sub_path}.{class_name.lower()}"
    try:
        module = importlib.import_module(module_name)
        block_class = getattr(module, class_name)
    except (ModuleNotFoundError, AttributeError) as err:
        if isinstance(err, ModuleNotFoundError) and err.name and not module_name.startswith(err.name):
            raise
        package_name = module_name.rsplit('.', 1)[0]
        available = _blocks_in_a_package(package_name)
        message = f"Cannot find block {block_name} (i.e. class {module_name}.{class_name})"
        if available:
            message += f"\nAvailable blocks in {package_name} are:\n" + '\n'.join(available)
        raise ValueError(message) from err
    logging.debug('Creating block %s with %s', block_name, kwargs)
    return block_class(**kwargs)


class Run(object):
    """Processing unit that runs a sequence of blocks over a Dataset."""

    def __init__(self, scenario):
        """`scenario` is a list of tokens such as ['read.Tsv', 'files=a.tsv', 'eval.Auc']."""
        if not isinstance(scenario, list):
            raise TypeError(f"Expected scenario as list, obtained a {type(scenario).__name__}")
        if not scenario:
            raise ValueError('Empty scenario')
        self.scenario = scenario

    def execute(self):
        """Parse the scenario, run it and return the Dataset of the last round."""
        block_names, block_args = _parse_scenario(self.scenario)
        blocks = [(name, _import_block(name, args)) for name, args in zip(block_names, block_args)]

        for _, block in blocks:
            block.process_start()

        readers = [block for _, block in blocks if hasattr(block, 'finished')]
        finished, dataset = False, None
        while not finished:
            dataset = Dataset()
            for name, block in blocks:
                logging.info("Executing block %s", name)
                block.apply_on_dataset(dataset)
            finished = all(reader.finished for reader in readers)

        for _, block in blocks:
            block.process_end()
        return dataset

    def scenario_string(self):
        return ' '.join(self.scenario)


def create_block(block, **kwargs):
    """A factory function for creating new block instances (handy in tests and notebooks)."""
    return _import_block(block, kwargs)

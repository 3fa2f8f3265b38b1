"""Command-line interface: every subcommand runs a block scenario.

Examples::

    lrea generate --data train.tsv --test-data test.tsv
    lrea train --data train.tsv --test-data test.tsv --checkpoint model.json --log train.ndjson --r 32
    lrea eval --data test.tsv --checkpoint model.json
    lrea precompute --data train.tsv --checkpoint model.json --store states/
    lrea score --requests requests.tsv --store states/ --checkpoint model.json
    lrea bench --report bench.json
    lrea gradcheck
    lrea scenario read.Synthetic n_examples=2000 test_fraction=0.2 model.Train epochs=2 eval.Auc on=heldout
"""
import argparse
import json
import logging
import sys

from lrea.core.config import DEFAULT_SEED
from lrea.core.gradcheck import EvaluationError
from lrea.core.run import Run
from lrea.core.store import CacheMissError

LOG_FORMAT = '%(asctime)-15s [%(levelname)7s] %(funcName)s - %(message)s'

# flag -> (block parameter, help); the block parameter is None for paths handled separately
MODEL_FLAGS = {
    'model': ('kind', 'model kind: lrea, din (DIN on the long sequence) or din_short'),
    'r': ('rank', 'rank r of the low-rank attention'),
    'd': ('dim', 'embedding dimension d'),
    'h': ('hidden', 'attention hidden width h'),
}
TRAIN_FLAGS = {
    'lambda': ('lam', 'weight λ of the non-negativity penalty'),
    'lr': ('learning_rate', 'Adagrad learning rate'),
    'batch': ('batch_size', 'batch size'),
    'epochs': ('epochs', 'number of epochs'),
    'seed': ('seed', 'random seed'),
    'threads': ('threads', 'worker threads per batch'),
    'precision': ('precision', 'parameter precision, 32 or 64 bits'),
}
DATA_FLAGS = {
    'L': ('seq_len', 'capacity L of the long sequence'),
    'S': ('short_len', 'capacity S of the short sequence'),
}
GENERATE_FLAGS = {
    'users': ('n_users', 'number of users'),
    'items': ('n_items', 'number of items'),
    'examples': ('n_examples', 'number of examples'),
    'noise': ('noise', 'label noise'),
    'seed': ('seed', 'random seed'),
    'test_fraction': ('test_fraction', 'fraction of examples written to --test-data'),
    **DATA_FLAGS,
}
BENCH_FLAGS = {
    'grid': ('grid', 'comma-separated sequence capacities L'),
    'B': ('B', 'comma-separated numbers of candidates per request'),
    'r': ('r', 'rank r'),
    'd': ('d', 'embedding dimension d'),
    'h': ('h', 'attention hidden width h'),
    'repetitions': ('repetitions', 'timed repetitions per measurement'),
    'seed': ('seed', 'random seed'),
    'precision': ('precision', 'arithmetic precision, 32 or 64 bits'),
}
GRADCHECK_FLAGS = {
    'L': ('seq_len', 'capacity L'),
    'r': ('rank', 'rank r'),
    'd': ('dim', 'embedding dimension d'),
    'h': ('hidden', 'attention hidden width h'),
    'batch': ('batch', 'number of examples'),
    'lambda': ('lam', 'weight λ of the non-negativity penalty'),
    'seed': ('seed', 'random seed'),
    'model': ('kind', 'model kind'),
}
SWEEP_FLAGS = {
    'ranks': ('ranks', 'comma-separated ranks'),
    'lambdas': ('lambdas', 'comma-separated λ values'),
    'seeds': ('seeds', 'comma-separated seeds'),
}

FLAG_TYPES = {'model': str, 'lambda': float, 'lr': float, 'noise': float, 'test_fraction': float,
              'grid': str, 'B': str, 'ranks': str, 'lambdas': str, 'seeds': str}

# subcommand -> (path flags, required path flags, tunable flags, defaults)
SUBCOMMANDS = {
    'generate': (('data', 'test_data'), ('data',), GENERATE_FLAGS, {'seed': DEFAULT_SEED}),
    'train': (('data', 'test_data', 'checkpoint', 'log'), ('data', 'checkpoint'),
              {**DATA_FLAGS, **MODEL_FLAGS, **TRAIN_FLAGS}, {'seed': DEFAULT_SEED}),
    'eval': (('data', 'checkpoint'), ('data', 'checkpoint'), {}, {}),
    'precompute': (('data', 'checkpoint', 'store'), ('data', 'checkpoint', 'store'), {}, {}),
    'score': (('requests', 'store', 'checkpoint'), ('requests', 'store', 'checkpoint'),
              {'precision': ('precision', 'arithmetic precision, 32 or 64 bits')}, {}),
    'bench': (('checkpoint', 'report'), (), BENCH_FLAGS, {'seed': DEFAULT_SEED}),
    'gradcheck': ((), (), GRADCHECK_FLAGS, {'seed': DEFAULT_SEED}),
    'sweep': (('data', 'test_data', 'report'), ('data',),
              {**DATA_FLAGS, **MODEL_FLAGS, **TRAIN_FLAGS, **SWEEP_FLAGS}, {'seed': DEFAULT_SEED}),
}

PATH_HELP = {
    'data': 'TSV dataset',
    'test_data': 'held-out TSV dataset',
    'checkpoint': 'JSON checkpoint',
    'log': 'training log (one JSON record per epoch)',
    'store': 'state store directory',
    'requests': 'request file (user_id, candidates, side ids)',
    'report': 'JSON report (default: standard output)',
}

USER_ERRORS = (ValueError, TypeError, KeyError, IndexError, OSError, RuntimeError, ArithmeticError,
               EvaluationError)


def _flag(name):
    return '--' + name.replace('_', '-')


def build_parser():
    parser = argparse.ArgumentParser(prog='lrea', description='Low-rank efficient attention for CTR prediction.')
    subparsers = parser.add_subparsers(dest='subcommand', metavar='SUBCOMMAND')
    for name, (paths, _, tunables, _) in SUBCOMMANDS.items():
        sub = subparsers.add_parser(name, argument_default=argparse.SUPPRESS)
        for path in paths:
            sub.add_argument(_flag(path), dest=path, help=PATH_HELP[path])
        for flag, (_, help_text) in tunables.items():
            sub.add_argument(_flag(flag), dest=flag, type=FLAG_TYPES.get(flag, int), help=help_text)
        _add_common(sub)
    scenario = subparsers.add_parser('scenario', help='run a block scenario, e.g. read.Tsv files=a.tsv eval.Auc')
    scenario.add_argument('tokens', nargs=argparse.REMAINDER, help='blocks and their key=value parameters')
    _add_common(scenario)
    return parser


def _add_common(parser):
    parser.add_argument('--config', default=None, help='JSON file with default values of the flags')
    parser.add_argument('-q', '--quiet', action='store_true', default=False, help='log only warnings')
    parser.add_argument('-v', '--verbose', action='store_true', default=False,
                        help='debug logging and tracebacks of errors')


def resolve(subcommand, given, config_path=None):
    """Merge defaults < config file < command-line flags; unknown config keys are rejected."""
    paths, required, tunables, defaults = SUBCOMMANDS[subcommand]
    known = set(paths) | set(tunables)
    resolved = dict(defaults)
    if config_path:
        with open(config_path, encoding='utf-8') as config_file:
            from_file = json.load(config_file)
        from_file = {key.replace('-', '_'): value for key, value in from_file.items()}
        unknown = set(from_file) - known
        if unknown:
            raise ValueError(f"{config_path}: unknown keys {sorted(unknown)} for {subcommand}; "
                             f"known keys are {', '.join(sorted(known))}")
        resolved.update(from_file)
    resolved.update({key: value for key, value in given.items() if key in known})
    missing = [_flag(path) for path in required if not resolved.get(path)]
    if missing:
        raise ValueError(f"{subcommand} needs {', '.join(missing)}")
    return resolved


def _params(resolved, flags):
    return [f"{flags[name][0]}={value}" for name, value in sorted(resolved.items()) if name in flags]


def build_scenario(subcommand, resolved):
    """The block scenario (list of tokens) implementing a subcommand."""
    tunables = SUBCOMMANDS[subcommand][2]
    get = resolved.get
    if subcommand == 'generate':
        params = _params(resolved, tunables)
        if get('test_data') and 'test_fraction' not in resolved:
            params.append('test_fraction=0.2')
        scenario = ['read.Synthetic', *params, 'write.Tsv', f"files={get('data')}"]
        if get('test_data'):
            scenario += ['write.Tsv', 'heldout=1', f"files={get('test_data')}"]
        return scenario
    if subcommand in ('train', 'sweep'):
        scenario = ['read.Tsv', f"files={get('data')}", *_params(resolved, DATA_FLAGS)]
        if get('test_data'):
            scenario += ['read.Tsv', 'heldout=1', f"files={get('test_data')}", *_params(resolved, DATA_FLAGS)]
        block_flags = {**MODEL_FLAGS, **TRAIN_FLAGS, **SWEEP_FLAGS}
        if subcommand == 'train':
            scenario += ['model.Train', f"checkpoint={get('checkpoint')}", *_params(resolved, block_flags)]
            if get('log'):
                scenario.append(f"log={get('log')}")
        else:
            scenario += ['model.Sweep', *_params(resolved, block_flags)]
            if get('report'):
                scenario.append(f"files={get('report')}")
        return scenario
    if subcommand == 'eval':
        return ['read.Tsv', f"files={get('data')}", f"checkpoint={get('checkpoint')}",
                'eval.Auc', f"checkpoint={get('checkpoint')}"]
    if subcommand == 'precompute':
        return ['read.Tsv', f"files={get('data')}", f"checkpoint={get('checkpoint')}",
                'serve.Precompute', f"store={get('store')}", f"checkpoint={get('checkpoint')}"]
    if subcommand == 'score':
        return ['serve.Score', f"requests={get('requests')}", f"store={get('store')}",
                f"checkpoint={get('checkpoint')}", *_params(resolved, tunables)]
    if subcommand == 'bench':
        scenario = ['serve.Bench', *_params(resolved, tunables)]
        if get('checkpoint'):
            scenario.append(f"checkpoint={get('checkpoint')}")
        if get('report'):
            scenario.append(f"files={get('report')}")
        return scenario
    if subcommand == 'gradcheck':
        return ['util.GradCheck', *_params(resolved, tunables)]
    raise ValueError(f"unknown subcommand {subcommand}")


def _error_message(err):
    if isinstance(err, KeyError) and not isinstance(err, CacheMissError) and err.args:
        return str(err.args[0])
    return str(err)


def run(argv=None):
    """Run the command line `argv` (default sys.argv[1:]) and return the exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exit_:
        return exit_.code if isinstance(exit_.code, int) else 2
    if args.subcommand is None:
        parser.print_usage(sys.stderr)
        print('lrea: error: a subcommand is required', file=sys.stderr)
        return 2

    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(format=LOG_FORMAT, level=level, force=True)

    try:
        if args.subcommand == 'scenario':
            if not args.tokens:
                raise ValueError('scenario needs at least one block')
            scenario = args.tokens
        else:
            given = {key: value for key, value in vars(args).items()
                     if key not in ('subcommand', 'config', 'quiet', 'verbose')}
            resolved = resolve(args.subcommand, given, args.config)
            logging.info('lrea %s, resolved config: %s', args.subcommand, json.dumps(resolved, sort_keys=True))
            scenario = build_scenario(args.subcommand, resolved)
        runner = Run(scenario)
        logging.info('Scenario: %s', runner.scenario_string())
        runner.execute()
    except USER_ERRORS as err:
        if args.verbose:
            logging.exception('%s failed', args.subcommand)
        print(f"lrea: error: {_error_message(err)}", file=sys.stderr)
        return 1
    return 0


def main():
    sys.exit(run())


if __name__ == '__main__':
    main()

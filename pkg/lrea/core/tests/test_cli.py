#!/usr/bin/env python3

import io
import json
import os
import tempfile
import unittest
from contextlib import redirect_stderr, redirect_stdout

from lrea.cli import build_scenario, resolve, run

GENERATE = ['--users', '40', '--items', '80', '--examples', '400', '--L', '10', '--S', '3']
TRAIN = ['--L', '10', '--S', '3', '--r', '4', '--d', '4', '--h', '5', '--epochs', '1', '--batch', '50']


def run_quietly(argv):
    """Run the command line, return (exit status, stdout, stderr)."""
    out, err = io.StringIO(), io.StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        status = run(argv)
    return status, out.getvalue(), err.getvalue()


class TestCli(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()

    def tearDown(self):
        self.tmp.cleanup()

    def path(self, name):
        return os.path.join(self.tmp.name, name)

    def test_no_subcommand(self):
        status, _, err = run_quietly([])
        self.assertEqual(status, 2)
        self.assertIn('subcommand is required', err)

    def test_bad_flag(self):
        status, _, err = run_quietly(['train', '--data', 'a.tsv', '--bogus', '1'])
        self.assertEqual(status, 2)
        self.assertIn('--bogus', err)
        self.assertEqual(run_quietly(['train', '--r', 'many'])[0], 2)

    def test_missing_required_path(self):
        status, _, err = run_quietly(['train', '-q', '--data', self.path('a.tsv')])
        self.assertEqual(status, 1)
        self.assertIn('--checkpoint', err)

    def test_missing_file(self):
        status, _, err = run_quietly(['eval', '-q', '--data', self.path('missing.tsv'),
                                      '--checkpoint', self.path('missing.json')])
        self.assertEqual(status, 1)
        self.assertTrue(err.startswith('lrea: error:'))
        self.assertNotIn('Traceback', err)

    def test_gradcheck(self):
        status, out, _ = run_quietly(['gradcheck', '-q'])
        self.assertEqual(status, 0)
        self.assertIn('w_decomp', out)
        self.assertNotIn('FAIL', out)

    def test_resolve(self):
        config = self.path('config.json')
        with open(config, 'w', encoding='utf-8') as config_file:
            json.dump({'epochs': 3, 'lambda': 0.5, 'test-data': 't.tsv'}, config_file)
        resolved = resolve('train', {'data': 'd.tsv', 'checkpoint': 'm.json', 'epochs': 9}, config)
        self.assertEqual(resolved['epochs'], 9)
        self.assertEqual(resolved['lambda'], 0.5)
        self.assertEqual(resolved['test_data'], 't.tsv')
        self.assertEqual(resolved['seed'], 7)
        with open(config, 'w', encoding='utf-8') as config_file:
            json.dump({'epoch': 3}, config_file)
        with self.assertRaisesRegex(ValueError, 'epoch'):
            resolve('train', {'data': 'd.tsv', 'checkpoint': 'm.json'}, config)
        with self.assertRaisesRegex(ValueError, '--data'):
            resolve('eval', {'checkpoint': 'm.json'})

    def test_build_scenario(self):
        scenario = build_scenario('generate', {'data': 'a.tsv', 'test_data': 'b.tsv', 'seed': 7, 'L': 50})
        self.assertEqual(scenario, ['read.Synthetic', 'seq_len=50', 'seed=7', 'test_fraction=0.2',
                                    'write.Tsv', 'files=a.tsv', 'write.Tsv', 'heldout=1', 'files=b.tsv'])
        scenario = build_scenario('train', {'data': 'a.tsv', 'checkpoint': 'm.json', 'lambda': 0.0, 'r': 8})
        self.assertEqual(scenario, ['read.Tsv', 'files=a.tsv', 'model.Train', 'checkpoint=m.json',
                                    'lam=0.0', 'rank=8'])

    def test_pipeline(self):
        data, test = self.path('train.tsv'), self.path('test.tsv')
        status, _, _ = run_quietly(['generate', '-q', '--data', data, '--test-data', test] + GENERATE)
        self.assertEqual(status, 0)

        checkpoints = []
        for name in ('first.json', 'second.json'):
            checkpoints.append(self.path(name))
            status, _, err = run_quietly(['train', '-q', '--data', data, '--test-data', test,
                                          '--checkpoint', checkpoints[-1], '--log', self.path('log.ndjson')]
                                         + TRAIN)
            self.assertEqual(status, 0, err)
        with open(checkpoints[0], 'rb') as first, open(checkpoints[1], 'rb') as second:
            self.assertEqual(first.read(), second.read())

        status, out, _ = run_quietly(['eval', '-q', '--data', test, '--checkpoint', checkpoints[0]])
        self.assertEqual(status, 0)
        self.assertIn('gauc', out)

        store = self.path('states')
        status, _, _ = run_quietly(['precompute', '-q', '--data', data, '--checkpoint', checkpoints[0],
                                    '--store', store])
        self.assertEqual(status, 0)
        with open(os.path.join(store, 'manifest.json'), encoding='utf-8') as manifest_file:
            user = json.load(manifest_file)['users'][0]
        requests = self.path('requests.tsv')
        with open(requests, 'w', encoding='utf-8') as request_file:
            request_file.write(f"{user}\t5,17,42\t3\n")
        status, out, _ = run_quietly(['score', '-q', '--requests', requests, '--store', store,
                                      '--checkpoint', checkpoints[0]])
        self.assertEqual(status, 0)
        self.assertEqual(len(out.split('\t')), 3)

        # a store built for another checkpoint is refused
        retrained = self.path('retrained.json')
        run_quietly(['train', '-q', '--data', data, '--checkpoint', retrained, '--seed', '8'] + TRAIN)
        status, _, err = run_quietly(['score', '-q', '--requests', requests, '--store', store,
                                      '--checkpoint', retrained])
        self.assertEqual(status, 1)
        self.assertIn('precompute again', err)

    def test_bench(self):
        report = self.path('bench.json')
        status, _, err = run_quietly(['bench', '-q', '--grid', '8,16', '--B', '2,3', '--r', '4',
                                      '--repetitions', '2', '--report', report])
        self.assertEqual(status, 0, err)
        with open(report, encoding='utf-8') as report_file:
            self.assertEqual(json.load(report_file)['config']['grid'], [8, 16])

    def test_scenario(self):
        status, out, _ = run_quietly(['scenario', '-q', 'read.Synthetic', 'n_users=20', 'n_examples=100',
                                      'seq_len=6', 'short_len=2', 'write.Tsv'])
        self.assertEqual(status, 0)
        self.assertEqual(len(out.splitlines()), 100)
        self.assertEqual(run_quietly(['scenario', '-q'])[0], 1)


if __name__ == "__main__":
    unittest.main()

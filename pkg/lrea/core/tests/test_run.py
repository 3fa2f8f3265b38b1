#!/usr/bin/env python3

import io
import json
import os
import tempfile
import unittest
from contextlib import redirect_stdout

from lrea.core.block import Block
from lrea.core.dataset import Dataset
from lrea.core.run import Run, _convert_value, _parse_scenario, create_block

SMALL_DATA = ['read.Synthetic', 'n_users=30', 'n_items=60', 'n_examples=300', 'seq_len=8', 'short_len=3',
              'test_fraction=0.2']
SMALL_MODEL = ['rank=4', 'dim=4', 'hidden=5', 'head_sizes=8', 'epochs=1', 'batch_size=32']


class TestRun(unittest.TestCase):

    def test_parse_scenario(self):
        names, args = _parse_scenario(['read.Tsv', 'files=a.tsv,b.tsv', 'seq_len=50', 'model.Train',
                                       'lam=0.5', 'kind=din', 'log=x=y.ndjson'])
        self.assertEqual(names, ['read.Tsv', 'model.Train'])
        self.assertEqual(args, [{'files': 'a.tsv,b.tsv', 'seq_len': 50},
                                {'lam': 0.5, 'kind': 'din', 'log': 'x=y.ndjson'}])
        with self.assertRaises(ValueError):
            _parse_scenario(['seq_len=50', 'read.Tsv'])

    def test_convert_value(self):
        self.assertEqual(_convert_value('-3'), -3)
        self.assertEqual(_convert_value('1e-4'), 1e-4)
        self.assertEqual(_convert_value('.5'), 0.5)
        self.assertEqual(_convert_value('64,32'), '64,32')
        self.assertEqual(_convert_value('inf'), 'inf')

    def test_scenario_checks(self):
        with self.assertRaises(TypeError):
            Run('read.Tsv files=a.tsv')
        with self.assertRaises(ValueError):
            Run([])

    def test_unknown_block(self):
        with self.assertRaisesRegex(ValueError, 'read.Tsv'):
            create_block('read.Csv')
        with self.assertRaises(ValueError):
            create_block('nothing.Here')

    def test_unknown_parameter(self):
        with self.assertRaisesRegex(TypeError, 'checkpoint'):
            create_block('eval.Auc', chekpoint='a.json')
        with self.assertRaisesRegex(TypeError, 'learning_rate'):
            create_block('model.Train', learning_rat=0.1)
        with self.assertRaisesRegex(TypeError, 'n_users'):
            create_block('read.Synthetic', users=3)

    def test_block_needs_processing(self):
        with self.assertRaises(NotImplementedError):
            Block().process_dataset(Dataset())
        self.assertEqual(create_block('write.Tsv').block_name(), 'write.Tsv')

    def test_reader_after_examples(self):
        dataset = Run(SMALL_DATA).execute()
        with self.assertRaises(RuntimeError):
            create_block('read.Synthetic', n_examples=5).apply_on_dataset(dataset)

    def test_train_and_evaluate(self):
        with tempfile.TemporaryDirectory() as tmp:
            checkpoint = os.path.join(tmp, 'model.json')
            log = os.path.join(tmp, 'train.ndjson')
            output = io.StringIO()
            with redirect_stdout(output):
                dataset = Run(SMALL_DATA + ['model.Train', f"checkpoint={checkpoint}", f"log={log}"]
                              + SMALL_MODEL + ['eval.Auc', 'on=heldout', 'as_json=1']).execute()
            values = json.loads(output.getvalue())
            self.assertEqual(values['count'], 60)
            self.assertIn('oracle_auc', values)
            self.assertEqual(dataset.meta['evaluation'], values)
            self.assertTrue(os.path.exists(checkpoint))
            with open(log, encoding='utf-8') as log_file:
                records = [json.loads(line) for line in log_file]
            self.assertEqual([r['epoch'] for r in records], [0, 1])
            self.assertEqual(records, dataset.meta['history'])

            output = io.StringIO()
            with redirect_stdout(output):
                Run(SMALL_DATA + ['eval.Auc', f"checkpoint={checkpoint}", 'on=heldout', 'color=0']).execute()
            self.assertIn('auc', output.getvalue())
            self.assertIn('count      60', output.getvalue())

    def test_precompute_and_score(self):
        with tempfile.TemporaryDirectory() as tmp:
            store = os.path.join(tmp, 'states')
            requests = os.path.join(tmp, 'requests.tsv')
            with open(requests, 'w', encoding='utf-8') as request_file:
                request_file.write('u3\t1,2,3\t5\n\nu4\t7\n')
            output = io.StringIO()
            with redirect_stdout(output):
                dataset = Run(SMALL_DATA + ['model.Train'] + SMALL_MODEL + [
                    'serve.Precompute', f"store={store}", 'users=u3,u4',
                    'serve.Score', f"requests={requests}"]).execute()
            lines = output.getvalue().splitlines()
            self.assertEqual([len(line.split('\t')) for line in lines], [3, 1])
            self.assertTrue(all(0 < float(p) < 1 for line in lines for p in line.split('\t')))
            self.assertEqual(dataset.meta['store'].users, ['u3', 'u4'])

    def test_writer_files(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, 'nested', 'data.tsv')
            Run(SMALL_DATA + ['write.Tsv', f"files={path}"]).execute()
            with open(path, encoding='utf-8') as written:
                self.assertEqual(len(written.readlines()), 240)
            with self.assertRaisesRegex(ValueError, 'held-out'):
                Run(['read.Synthetic', 'n_examples=10', 'seq_len=4', 'short_len=2',
                     'write.Tsv', 'heldout=1', f"files={path}"]).execute()

    def test_sweep(self):
        output = io.StringIO()
        with redirect_stdout(output):
            Run(SMALL_DATA + ['model.Sweep', 'ranks=2,4', 'seeds=1,2'] + SMALL_MODEL).execute()
        report = json.loads(output.getvalue())
        self.assertEqual(len(report['rows']), 4)
        self.assertEqual(set(report['mean_auc']), {'rank=2 lambda=0.3', 'rank=4 lambda=0.3'})

    def test_sweep_rejects_checkpoint_and_log(self):
        for name in ('checkpoint', 'log'):
            with self.assertRaisesRegex(TypeError, f"model.Sweep .*{name}"):
                create_block('model.Sweep', ranks='2', **{name: 'out.json'})
        names = create_block('model.Sweep', ranks='2').parameter_names()
        self.assertNotIn('checkpoint', names)
        self.assertIn('lam', names)
        self.assertIn('files', names)

    def test_gradcheck_block(self):
        output = io.StringIO()
        with redirect_stdout(output):
            dataset = Run(['util.GradCheck', 'as_json=1']).execute()
        self.assertTrue(json.loads(output.getvalue())['passed'])
        self.assertTrue(dataset.meta['gradcheck'].passed)


if __name__ == "__main__":
    unittest.main()

"""StateStore is a file-backed key-value store of per-user compressed states.

Layout of a store directory::

    manifest.json          {"format", "params_version", "d", "r", "S", "user_count", "users"}
    users/<user>.npy       float64 array of shape (2, d, r): E_Comp and E_Auxabsorb
    users/<user>.short.npy int64 array of shape (S,): short-sequence ids

The manifest is written last, so a store whose writer crashed has no (or an old) manifest.
"""
import json
import logging
import os
import threading
import urllib.parse
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from lrea.core.matrix import Matrix

FORMAT = 'lrea-state-store/1'


class StaleCacheError(RuntimeError):
    """Cached states were computed with another params version than the model in use."""


class CacheMissError(KeyError):
    """No cached state for the requested user."""

    def __str__(self):
        return self.args[0] if self.args else 'cache miss'


@dataclass
class CompressedUserState:
    """Serving-time substitute of a user's raw long sequence.

    e_comp = E_s^T·W_Comp and e_auxabsorb = E_s^T·W_Decomp^T, both d×r.
    """
    user_id: str
    e_comp: Matrix
    e_auxabsorb: Matrix
    params_version: str
    short_ids: np.ndarray


def _record_name(user_id):
    return urllib.parse.quote(user_id, safe='')


class StateStore(object):
    """Reader of a store directory with an in-memory read cache (safe for concurrent readers)."""

    def __init__(self, path):
        self.path = Path(path)
        manifest_path = self.path / 'manifest.json'
        if not manifest_path.is_file():
            raise FileNotFoundError(f"{self.path} is not a state store (no manifest.json)")
        with open(manifest_path, encoding='utf-8') as manifest_file:
            self.manifest = json.load(manifest_file)
        if self.manifest.get('format') != FORMAT:
            raise ValueError(f"{manifest_path}: unsupported format {self.manifest.get('format')!r}")
        self._users = set(self.manifest['users'])
        self._cache = {}
        self._lock = threading.Lock()

    @property
    def params_version(self):
        return self.manifest['params_version']

    @property
    def dim(self):
        return self.manifest['d']

    @property
    def rank(self):
        return self.manifest['r']

    @property
    def users(self):
        return list(self.manifest['users'])

    def __len__(self):
        return len(self._users)

    def __contains__(self, user_id):
        return user_id in self._users

    def check_version(self, params_version):
        if params_version != self.params_version:
            raise StaleCacheError(f"state store {self.path} was built for params "
                                  f"{self.params_version[:12]}, the checkpoint is {params_version[:12]}; "
                                  "run precompute again")

    def get(self, user_id):
        """Return the CompressedUserState of `user_id` (CacheMissError if not stored)."""
        state = self._cache.get(user_id)
        if state is not None:
            return state
        if user_id not in self._users:
            raise CacheMissError(f"user {user_id!r} is not in the state store {self.path}")
        base = self.path / 'users' / _record_name(user_id)
        both = np.load(f"{base}.npy")
        short_ids = np.load(f"{base}.short.npy")
        state = CompressedUserState(user_id, Matrix(both[0]), Matrix(both[1]), self.params_version, short_ids)
        with self._lock:
            self._cache[user_id] = state
        return state

    @classmethod
    def write(cls, path, states, params_version, dim, rank, short_len):
        """Replace the content of `path` with `states`; one exclusive writer at a time."""
        path = Path(path)
        users_dir = path / 'users'
        users_dir.mkdir(parents=True, exist_ok=True)
        lock_path = path / '.lock'
        try:
            lock = os.open(lock_path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise RuntimeError(f"state store {path} is locked by another writer ({lock_path})") from None
        try:
            manifest_path = path / 'manifest.json'
            if manifest_path.exists():
                manifest_path.unlink()
            for old in users_dir.glob('*.npy'):
                old.unlink()
            users = []
            for state in states:
                if state.params_version != params_version:
                    raise StaleCacheError(f"state of user {state.user_id} has params version "
                                          f"{state.params_version[:12]}, expected {params_version[:12]}")
                base = users_dir / _record_name(state.user_id)
                both = np.stack([state.e_comp.data, state.e_auxabsorb.data]).astype(np.float64)
                np.save(f"{base}.npy", both)
                np.save(f"{base}.short.npy", np.asarray(state.short_ids, dtype=np.int64))
                users.append(state.user_id)
            manifest = {'format': FORMAT, 'params_version': params_version, 'd': dim, 'r': rank,
                        'S': short_len, 'user_count': len(users), 'users': sorted(users)}
            with open(manifest_path, 'w', encoding='utf-8') as manifest_file:
                json.dump(manifest, manifest_file, indent=1, sort_keys=True)
                manifest_file.write('\n')
            logging.info('Stored %d user states in %s', len(users), path)
        finally:
            os.close(lock)
            os.unlink(lock_path)
        return cls(path)

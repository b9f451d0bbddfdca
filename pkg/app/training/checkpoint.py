"""Single-file network checkpoints.

File layout:

    EANET-CHECKPOINT 1\\n
    <header length in bytes>\\n
    <YAML header>
    <raw array bytes>

The YAML header holds the metadata, the network shape and a table with the
name, dtype, shape, offset and size of every array. Arrays are stored in
name order as little-endian C-order bytes, and the header is written with
sorted keys, so saving the same content always produces the same bytes.
"""
import dataclasses
import hashlib
import logging
import re

import numpy as np
import torch
import yaml

import atomic_file
from model import architecture
from model import network

logger = logging.getLogger(__name__)

MAGIC = b'EANET-CHECKPOINT 1\n'

_FC6_WEIGHT = re.compile(r'^head\.fc6\.(\d+)\.weight$')


class Error(Exception):
    pass


class CheckpointFormatError(Error):
    pass


@dataclasses.dataclass
class Checkpoint:
    spec: architecture.NetworkSpec
    # Parameter name -> numpy array.
    arrays: dict
    metadata: dict = dataclasses.field(default_factory=dict)

    @property
    def domains(self):
        return len([n for n in self.arrays if _FC6_WEIGHT.match(n)])

    def parameter_count(self):
        return int(sum(a.size for a in self.arrays.values()))

    def subset(self, prefixes):
        prefixes = tuple(prefixes)
        return {n: a for n, a in self.arrays.items() if n.startswith(prefixes)}


def from_network(net, metadata=None, include_domains=True):
    """Snapshots the parameters of a network.EANet."""
    arrays = {}
    for name, value in net.state_dict().items():
        if not include_domains and name.startswith('head.fc6.'):
            continue
        arrays[name] = value.detach().cpu().numpy().copy()
    return Checkpoint(net.spec, arrays, dict(metadata or {}))


def to_network(checkpoint, domains=None):
    """Builds a network.EANet holding the checkpoint's parameters.

    Args:
        checkpoint: A Checkpoint.
        domains: Number of FC6 layers to create when the checkpoint carries
            none; ignored otherwise.
    """
    stored_domains = checkpoint.domains
    net = network.EANet(checkpoint.spec,
                        domains=stored_domains or (domains or 0))
    state = {n: torch.from_numpy(a.copy()) for n, a in checkpoint.arrays.items()}
    if not stored_domains:
        for name, value in net.state_dict().items():
            if name.startswith('head.fc6.'):
                state[name] = value
    try:
        net.load_state_dict(state, strict=True)
    except RuntimeError as e:
        raise CheckpointFormatError(
            f'Checkpoint does not match its network shape: {e}') from e
    return net


def content_hash(checkpoint):
    """SHA-256 over the array names, dtypes, shapes and bytes."""
    digest = hashlib.sha256()
    for name in sorted(checkpoint.arrays):
        array = np.ascontiguousarray(checkpoint.arrays[name])
        digest.update(name.encode('utf-8'))
        digest.update(str(array.dtype).encode('utf-8'))
        digest.update(str(array.shape).encode('utf-8'))
        digest.update(array.tobytes())
    return digest.hexdigest()


def _to_little_endian(array):
    array = np.ascontiguousarray(array)
    return array.astype(array.dtype.newbyteorder('<'), copy=False)


def dumps(checkpoint):
    table = []
    chunks = []
    offset = 0
    for name in sorted(checkpoint.arrays):
        array = _to_little_endian(checkpoint.arrays[name])
        data = array.tobytes()
        table.append({
            'name': name,
            'dtype': array.dtype.str,
            'shape': list(array.shape),
            'offset': offset,
            'nbytes': len(data),
        })
        chunks.append(data)
        offset += len(data)
    header = yaml.safe_dump(
        {
            'metadata': checkpoint.metadata,
            'network': checkpoint.spec.as_dict(),
            'arrays': table,
        },
        sort_keys=True,
        default_flow_style=False).encode('utf-8')
    return b''.join([MAGIC, f'{len(header)}\n'.encode('ascii'), header] +
                    chunks)


def loads(data):
    if not data.startswith(MAGIC):
        raise CheckpointFormatError('Not a checkpoint file.')
    rest = data[len(MAGIC):]
    length_line, _, rest = rest.partition(b'\n')
    try:
        header_length = int(length_line)
        header = yaml.safe_load(rest[:header_length].decode('utf-8'))
        if not isinstance(header, dict):
            raise CheckpointFormatError('Missing checkpoint header.')
        body = rest[header_length:]
        spec = architecture.from_dict(header['network'])
        arrays = {}
        for entry in header['arrays']:
            start, size = entry['offset'], entry['nbytes']
            if start + size > len(body):
                raise CheckpointFormatError(
                    f'Array {entry["name"]} is truncated.')
            arrays[entry['name']] = np.frombuffer(
                body[start:start + size],
                dtype=np.dtype(entry['dtype'])).reshape(entry['shape']).copy()
    except (ValueError, KeyError, TypeError, yaml.YAMLError) as e:
        raise CheckpointFormatError(f'Malformed checkpoint header: {e}') from e
    return Checkpoint(spec, arrays, header.get('metadata') or {})


def save(path, checkpoint):
    with atomic_file.create(path, chmod_mode=0o644) as f:
        f.write(dumps(checkpoint))
    logger.info('Saved checkpoint with %d parameters to %s',
                checkpoint.parameter_count(), path)


def load(path):
    try:
        with open(path, 'rb') as f:
            data = f.read()
    except OSError as e:
        raise CheckpointFormatError(f'Cannot read checkpoint {path}: {e}') from e
    return loads(data)

import math
import struct

import pytest
import numpy as np
import pandas as pd

from pyprimepart.exact import (
    CheckpointCorruptError,
    CheckpointTruncatedError,
    CheckpointVersionError,
    InexactDivisionError,
    PartitionTable,
    build_euler_dp,
    build_recursion,
    checkpoint_load,
    checkpoint_save,
    digit_count,
    enumerate_partitions,
    export_csv,
    extend_table,
    log_count,
    log_counts,
    verify_tables,
)
from pyprimepart.primes import SieveRangeError, SopfTable, build_sieve, build_sopf_table

__author__ = "pyprimepart developers"
__copyright__ = "pyprimepart developers"
__license__ = "GPL-2.0-or-later"

# number of partitions of n into primes, n = 0..20
FIRST_COUNTS = [1, 0, 1, 1, 1, 2, 2, 3, 3, 4, 5, 6, 7, 9, 10, 12, 14, 17, 19,
                23, 26]


@pytest.fixture(scope="module")
def sieve_60():
    return build_sieve(60)


@pytest.fixture
def table_dp_60(sieve_60):
    return build_euler_dp(60, sieve_60)


@pytest.fixture
def table_rec_60(sieve_60):
    return build_recursion(60, build_sopf_table(sieve_60))


@pytest.mark.parametrize("table", ["table_dp_60", "table_rec_60"])
def test_first_counts(table, request):
    table = request.getfixturevalue(table)
    assert list(table.counts[:21]) == FIRST_COUNTS


@pytest.mark.parametrize("table", ["table_dp_60", "table_rec_60"])
def test_counts_against_enumeration(table, request):
    table = request.getfixturevalue(table)
    for n in range(61):
        assert table[n] == enumerate_partitions(n)


def test_counts_are_python_ints(table_dp_2000, table_rec_2000):
    assert isinstance(table_dp_2000[2000], int)
    assert isinstance(table_rec_2000[2000], int)
    assert table_dp_2000[2000] > 2 ** 64


def _assert_counts_grow(counts):
    assert np.all(counts[2:] >= 1)
    assert np.all(counts[2:] >= counts[:-2])


def test_counts_grow_to_2000(table_dp_2000):
    _assert_counts_grow(table_dp_2000.counts)


@pytest.mark.slow
def test_counts_grow_to_1e4(table_dp_2e4):
    _assert_counts_grow(table_dp_2e4.counts[:10_001])


def test_algorithms_agree_to_2000(table_dp_2000, table_rec_2000):
    assert table_dp_2000.algorithm_tag == "euler_dp"
    assert table_rec_2000.algorithm_tag == "recursion"
    assert table_dp_2000.n_max == table_rec_2000.n_max == 2000
    assert verify_tables(table_dp_2000, table_rec_2000) is None
    assert table_dp_2000.same_counts(table_rec_2000)


@pytest.mark.slow
def test_algorithms_agree_to_1e4(sieve_2e4, sopf_2e4):
    dp = build_euler_dp(10_000, sieve_2e4)
    rec = build_recursion(10_000, sopf_2e4)
    assert verify_tables(dp, rec, threads=4) is None


@pytest.mark.parametrize("n_max, expected", [(0, [1]), (1, [1, 0])])
def test_tiny_tables(n_max, expected, sieve_60):
    assert list(build_euler_dp(n_max, sieve_60).counts) == expected
    assert list(build_recursion(n_max, build_sopf_table(sieve_60)).counts) == expected


def test_inexact_division_is_detected(sieve_60):
    values = build_sopf_table(sieve_60).values.copy()
    values[2] = 3
    broken = SopfTable(limit=60, values=values)
    with pytest.raises(InexactDivisionError) as excinfo:
        build_recursion(10, broken)
    assert excinfo.value.n == 2
    assert excinfo.value.remainder == 1


def test_builders_reject_small_sieve(sieve_60):
    with pytest.raises(SieveRangeError):
        build_euler_dp(100, sieve_60)
    with pytest.raises(SieveRangeError):
        build_recursion(100, build_sopf_table(sieve_60))
    with pytest.raises(ValueError):
        build_euler_dp(-1, sieve_60)


def test_partition_table_rejects_unknown_algorithm():
    with pytest.raises(ValueError):
        PartitionTable(counts=np.array([1], dtype=object), algorithm_tag="guess")


def test_extend_table_matches_fresh_build(table_dp_2000, sieve_2e4, sopf_2e4):
    short = build_euler_dp(1000, sieve_2e4)
    extended = extend_table(short, 2000, sopf_2e4)
    assert extended.algorithm_tag == "euler_dp"
    assert verify_tables(extended, table_dp_2000) is None
    assert extended.n_max == 2000
    truncated = extend_table(table_dp_2000, 500, sopf_2e4)
    assert truncated.n_max == 500


def test_log_count(table_dp_2000):
    for n in (0, 2, 10, 100, 1999, 2000):
        exact = math.log(table_dp_2000[n])
        assert log_count(table_dp_2000, n) == pytest.approx(exact, rel=1e-14, abs=1e-15)
    with pytest.raises(ValueError):
        log_count(table_dp_2000, 1)


def test_log_counts_threads_independent(table_dp_2000):
    single = log_counts(table_dp_2000, threads=1, chunk=128)
    multi = log_counts(table_dp_2000, threads=4, chunk=128)
    assert np.isnan(single[1])
    np.testing.assert_array_equal(single, multi)
    assert single[2000] == log_count(table_dp_2000, 2000)


@pytest.mark.parametrize("value", [0, 1, 9, 10, 99, 100, 10 ** 50 - 1, 10 ** 50,
                                   3 ** 2000])
def test_digit_count(value):
    assert digit_count(value) == len(str(value))


def test_verify_tables_finds_first_mismatch(table_dp_2000):
    counts = table_dp_2000.counts.copy()
    counts[1500] += 1
    counts[1800] += 1
    other = PartitionTable(counts=counts, algorithm_tag="recursion")
    assert verify_tables(table_dp_2000, other, chunk=256, threads=3) == 1500


def test_checkpoint_round_trip(tmp_path, table_dp_2000):
    path = tmp_path / "table.ckpt"
    checkpoint_save(table_dp_2000, path)
    loaded = checkpoint_load(path)
    assert loaded.same_counts(table_dp_2000)
    assert loaded.algorithm_tag == "euler_dp"
    assert loaded.checkpoint_meta.last_index == 2000
    assert loaded.checkpoint_meta.source == str(path)
    assert not (tmp_path / "table.ckpt.tmp").exists()


@pytest.fixture
def checkpoint_bytes(tmp_path, table_rec_60):
    path = tmp_path / "small.ckpt"
    checkpoint_save(table_rec_60, path)
    return path, path.read_bytes()


@pytest.mark.parametrize("cut", [0, 5, 20, 40, -1, -32])
def test_checkpoint_truncated(cut, checkpoint_bytes):
    path, data = checkpoint_bytes
    path.write_bytes(data[:cut])
    with pytest.raises(CheckpointTruncatedError):
        checkpoint_load(path)


def test_checkpoint_flipped_n_max(checkpoint_bytes):
    path, data = checkpoint_bytes
    # bit 48 of n_max, which starts at byte 7
    path.write_bytes(data[:13] + bytes([data[13] ^ 0x01]) + data[14:])
    with pytest.raises(CheckpointTruncatedError):
        checkpoint_load(path)


def test_checkpoint_bad_checksum(checkpoint_bytes):
    path, data = checkpoint_bytes
    path.write_bytes(data[:-1] + bytes([data[-1] ^ 0xFF]))
    with pytest.raises(CheckpointCorruptError):
        checkpoint_load(path)


def test_checkpoint_bad_magic(checkpoint_bytes):
    path, data = checkpoint_bytes
    path.write_bytes(b"XXXX" + data[4:])
    with pytest.raises(CheckpointCorruptError):
        checkpoint_load(path)


def test_checkpoint_trailing_bytes(checkpoint_bytes):
    path, data = checkpoint_bytes
    path.write_bytes(data + b"\x00")
    with pytest.raises(CheckpointCorruptError):
        checkpoint_load(path)


def test_checkpoint_version(checkpoint_bytes):
    path, data = checkpoint_bytes
    path.write_bytes(data[:4] + struct.pack("<H", 99) + data[6:])
    with pytest.raises(CheckpointVersionError):
        checkpoint_load(path)


def test_resume_from_partial_dp_checkpoint(tmp_path, sieve_2e4, sopf_2e4,
                                           table_dp_2000):
    path = tmp_path / "dp.ckpt"
    build_euler_dp(2000, sieve_2e4, checkpoint_path=path, checkpoint_every=300)
    # the final checkpoint holds the full table
    assert checkpoint_load(path).n_max == 2000

    partial = PartitionTable(counts=table_dp_2000.counts[:701].copy(),
                             algorithm_tag="euler_dp")
    checkpoint_save(partial, path)
    resumed = extend_table(checkpoint_load(path), 2000, sopf_2e4,
                           checkpoint_path=path, checkpoint_every=500)
    assert verify_tables(resumed, table_dp_2000) is None
    assert resumed.checkpoint_meta.last_index == 700
    assert checkpoint_load(path).n_max == 2000


def test_recursion_checkpoints(tmp_path, sopf_2e4, table_rec_2000):
    path = tmp_path / "rec.ckpt"
    build_recursion(1000, sopf_2e4, checkpoint_path=path, checkpoint_every=250)
    loaded = checkpoint_load(path)
    assert loaded.algorithm_tag == "recursion"
    assert loaded.n_max == 1000
    assert all(loaded.counts == table_rec_2000.counts[:1001])


def test_export_csv(tmp_path, table_dp_2000):
    path = tmp_path / "partitions.csv"
    export_csv(table_dp_2000, path, full=True)
    frame = pd.read_csv(path, dtype={"P": str}, float_precision="round_trip")
    assert list(frame.columns) == ["n", "digits", "ln_P", "P"]
    assert len(frame) == 2001
    assert np.isnan(frame["ln_P"][1])
    assert frame["P"][2000] == str(table_dp_2000[2000])
    assert frame["digits"][2000] == len(str(table_dp_2000[2000]))
    assert frame["ln_P"][2000] == log_count(table_dp_2000, 2000)


def test_export_csv_deterministic(tmp_path, table_dp_2000):
    paths = []
    for threads in (1, 2, 8):
        path = tmp_path / f"p{threads}.csv"
        export_csv(table_dp_2000, path, threads=threads)
        paths.append(path.read_bytes())
    assert paths[0] == paths[1] == paths[2]

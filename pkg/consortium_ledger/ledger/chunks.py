"""
Physical ledger files.

The ledger is stored as chunk files named `<first_seqno>-<last_seqno>.ledger`.
Every closed chunk ends with a signature entry; entries after the last
signature go to a `<first>-<last>.ledger.open` file. Concatenating the
frames of all files in seqno order gives the logical ledger.

File layout:

    8   magic "CLEDGER\\0"
    u32 format version
    str algorithm suite
    u64 first seqno
    u64 committed_upto      (writer's commit seqno when the file was written)
    frames...
"""

import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Union

from consortium_ledger.common.encoding import (
    Reader,
    encode_str,
    encode_u32,
    encode_u64,
)
from consortium_ledger.common.exceptions import EncodingError, LedgerIntegrityError
from consortium_ledger.crypto.primitives import ALGORITHM_SUITE
from consortium_ledger.ledger.entry import DecodedFrame, LedgerEntry, split_frames

logger = logging.getLogger("consortium_ledger.ledger.chunks")

CHUNK_MAGIC = b"CLEDGER\x00"
FORMAT_VERSION = 1
CHUNK_SUFFIX = ".ledger"
OPEN_SUFFIX = ".ledger.open"

_NAME = re.compile(r"^(\d+)-(\d+)\.ledger(\.open)?$")


@dataclass(frozen=True)
class ChunkHeader:
    format_version: int
    suite: str
    first_seqno: int
    committed_upto: int

    def encode(self) -> bytes:
        return (
            CHUNK_MAGIC
            + encode_u32(self.format_version)
            + encode_str(self.suite)
            + encode_u64(self.first_seqno)
            + encode_u64(self.committed_upto)
        )

    @classmethod
    def decode(cls, reader: Reader) -> "ChunkHeader":
        if reader.raw(len(CHUNK_MAGIC)) != CHUNK_MAGIC:
            raise EncodingError("not a ledger chunk", offset=0)
        return cls(reader.u32(), reader.str_(), reader.u64(), reader.u64())


@dataclass
class ChunkFile:
    """A parsed chunk file; error is set if decoding stopped early."""

    path: Path
    first_seqno: int
    last_seqno: int
    is_open: bool
    header: Optional[ChunkHeader] = None
    frames: List[DecodedFrame] = field(default_factory=list)
    error: Optional[EncodingError] = None


def chunk_name(first: int, last: int, is_open: bool = False) -> str:
    return f"{first}-{last}{OPEN_SUFFIX if is_open else CHUNK_SUFFIX}"


def split_into_chunks(
    entries: Sequence[LedgerEntry], chunk_threshold: int = 1
) -> List[List[LedgerEntry]]:
    """
    Group entries into chunks, closing a chunk at the first signature entry
    once it holds at least chunk_threshold entries. A trailing group without
    a signature is returned last.
    """
    chunks: List[List[LedgerEntry]] = []
    current: List[LedgerEntry] = []
    for entry in entries:
        current.append(entry)
        if entry.is_signature and len(current) >= chunk_threshold:
            chunks.append(current)
            current = []
    if current:
        chunks.append(current)
    return chunks


def render_chunks(
    entries: Sequence[LedgerEntry], committed_upto: int, chunk_threshold: int = 1
) -> List[tuple]:
    """(file name, bytes) pairs for the given entries."""
    files = []
    for chunk in split_into_chunks(entries, chunk_threshold):
        first, last = chunk[0].txid.seqno, chunk[-1].txid.seqno
        header = ChunkHeader(FORMAT_VERSION, ALGORITHM_SUITE, first, committed_upto)
        data = header.encode() + b"".join(e.encode() for e in chunk)
        files.append((chunk_name(first, last, not chunk[-1].is_signature), data))
    return files


def write_ledger_files(
    entries: Sequence[LedgerEntry],
    directory: Union[str, Path],
    committed_upto: int,
    chunk_threshold: int = 1,
) -> List[Path]:
    """
    Write entries as chunk files into directory, replacing existing chunks.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for stale in directory.iterdir():
        if _NAME.match(stale.name):
            stale.unlink()

    paths = []
    for name, data in render_chunks(entries, committed_upto, chunk_threshold):
        path = directory / name
        path.write_bytes(data)
        paths.append(path)
    logger.debug(f"Wrote {len(paths)} ledger files to {directory}")
    return paths


def parse_chunk(path: Path, data: bytes) -> ChunkFile:
    match = _NAME.match(path.name)
    if not match:
        raise EncodingError(f"not a ledger file name: {path.name}")
    chunk = ChunkFile(
        path=path,
        first_seqno=int(match.group(1)),
        last_seqno=int(match.group(2)),
        is_open=match.group(3) is not None,
    )
    reader = Reader(data)
    try:
        chunk.header = ChunkHeader.decode(reader)
    except EncodingError as e:
        chunk.error = e
        return chunk
    chunk.frames, chunk.error = split_frames(data, reader.offset)
    return chunk


def read_ledger_files(directory: Union[str, Path]) -> List[ChunkFile]:
    """Parse every chunk file in directory, ordered by first seqno."""
    directory = Path(directory)
    if not directory.is_dir():
        raise LedgerIntegrityError(f"ledger directory not found: {directory}")
    paths = [p for p in directory.iterdir() if _NAME.match(p.name)]
    chunks = [parse_chunk(p, p.read_bytes()) for p in paths]
    chunks.sort(key=lambda c: (c.first_seqno, c.is_open))
    return chunks


def load_entries(directory: Union[str, Path]) -> List[LedgerEntry]:
    """
    Read the logical ledger from directory.

    Raises:
        LedgerIntegrityError: If any file is malformed or any digest is wrong
    """
    entries: List[LedgerEntry] = []
    for chunk in read_ledger_files(directory):
        if chunk.error is not None:
            raise LedgerIntegrityError(f"{chunk.path.name}: {chunk.error.message}")
        for frame in chunk.frames:
            if not frame.digest_ok:
                raise LedgerIntegrityError(
                    f"{chunk.path.name}: digest mismatch", seqno=frame.entry.txid.seqno
                )
            entries.append(frame.entry)
    return entries

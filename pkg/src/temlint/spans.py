"""Source positions.

Offsets are UTF-8 byte offsets; lines and columns are 1-based, columns
counted in characters.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass, field


@dataclass(frozen=True, slots=True)
class SourceSpan:
    start_byte: int
    end_byte: int
    # line/col are derivable from the offsets and excluded from equality
    start_line: int = field(default=0, compare=False)
    start_col: int = field(default=0, compare=False)
    end_line: int = field(default=0, compare=False)
    end_col: int = field(default=0, compare=False)

    def __post_init__(self) -> None:
        if not 0 <= self.start_byte <= self.end_byte:
            raise ValueError(f"bad span {self.start_byte}..{self.end_byte}")

    def __len__(self) -> int:
        return self.end_byte - self.start_byte

    def contains(self, other: SourceSpan) -> bool:
        return self.start_byte <= other.start_byte and other.end_byte <= self.end_byte

    def cover(self, other: SourceSpan) -> SourceSpan:
        """Smallest span covering both ``self`` and ``other``."""
        first = self if self.start_byte <= other.start_byte else other
        last = self if self.end_byte >= other.end_byte else other
        return SourceSpan(
            first.start_byte,
            last.end_byte,
            first.start_line,
            first.start_col,
            last.end_line,
            last.end_col,
        )


class SourceIndex:
    """Maps character offsets of a source string to spans."""

    def __init__(self, source: str) -> None:
        self.source = source
        self.data = source.encode("utf-8", "surrogatepass")
        self._ascii = len(self.data) == len(source)
        self._bytes_at: list[int] | None = None
        if not self._ascii:
            acc = [0]
            total = 0
            for ch in source:
                total += len(ch.encode("utf-8", "surrogatepass"))
                acc.append(total)
            self._bytes_at = acc
        self._line_starts = [0]
        for i, ch in enumerate(source):
            if ch == "\n":
                self._line_starts.append(i + 1)

    def byte_offset(self, char_offset: int) -> int:
        if self._bytes_at is None:
            return char_offset
        return self._bytes_at[char_offset]

    def char_offset(self, byte_offset: int) -> int:
        if self._bytes_at is None:
            return byte_offset
        i = bisect_right(self._bytes_at, byte_offset) - 1
        if self._bytes_at[i] != byte_offset:
            raise ValueError(f"byte offset {byte_offset} splits a character")
        return i

    def line_col(self, char_offset: int) -> tuple[int, int]:
        line = bisect_right(self._line_starts, char_offset)
        return line, char_offset - self._line_starts[line - 1] + 1

    def span(self, start: int, end: int) -> SourceSpan:
        """Span for the character range ``start:end``."""
        sl, sc = self.line_col(start)
        el, ec = self.line_col(end)
        return SourceSpan(self.byte_offset(start), self.byte_offset(end), sl, sc, el, ec)

    def span_from_bytes(self, start_byte: int, end_byte: int) -> SourceSpan:
        return self.span(self.char_offset(start_byte), self.char_offset(end_byte))

    def text(self, span: SourceSpan) -> str:
        return self.data[span.start_byte : span.end_byte].decode("utf-8", "surrogatepass")

"""The three system events: policy request, data send and data transfer.

Send and Transfer optionally carry the receiver policy that gets recorded
with the data.  The rules leave that choice open when the sender's policy
base holds several candidates, so the checker makes it part of the label.
"""
from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True, order=True)
class Request:
    sndr: str
    rcv: str
    datatype: str
    policy: str

    def __str__(self):
        return f"request({self.sndr},{self.rcv},{self.datatype},{self.policy})"


@dataclass(frozen=True, order=True)
class Send:
    sndr: str
    rcv: str
    item: str
    policy: str | None = None

    def __str__(self):
        tail = f" under {self.policy}" if self.policy is not None else ""
        return f"send({self.sndr},{self.rcv},{self.item}){tail}"


@dataclass(frozen=True, order=True)
class Transfer:
    sndr: str
    rcv: str
    item: str
    policy: str | None = None

    def __str__(self):
        tail = f" under {self.policy}" if self.policy is not None else ""
        return f"transfer({self.sndr},{self.rcv},{self.item}){tail}"


Event = Request | Send | Transfer

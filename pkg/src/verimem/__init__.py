"""verimem: claim verification with tool-assisted retrieval and a
cross-claim evidence memory."""

from .decomposer import decompose, degenerate_decomposition, parse_decomposition
from .executor import MemoryPolicy, VerifyOutcome, parse_agent_output, verify
from .memory import MemoryStore
from .models import (
    Answer,
    Claim,
    Decomposition,
    EvidenceRecord,
    Step,
    ToolCall,
    Trajectory,
    Triplet,
    VeracityLabel,
    Verdict,
    entities_of,
)
from .providers import ChatMessage, HttpProvider, ProviderConfig, ScriptedProvider

__version__ = "0.1.0"

__all__ = [
    "Answer",
    "ChatMessage",
    "Claim",
    "Decomposition",
    "EvidenceRecord",
    "HttpProvider",
    "MemoryPolicy",
    "MemoryStore",
    "ProviderConfig",
    "ScriptedProvider",
    "Step",
    "ToolCall",
    "Trajectory",
    "Triplet",
    "VeracityLabel",
    "Verdict",
    "VerifyOutcome",
    "decompose",
    "degenerate_decomposition",
    "entities_of",
    "parse_agent_output",
    "parse_decomposition",
    "verify",
]

"""Token-level CUDA<->OpenCL kernel translator and porting checklist.

A small lexer classifies comments, string/char literals and code; rewrites
apply to code spans only, so tokens inside comments and strings are never
touched.  The mapping table is ordered longest-pattern-first: composite
indexing expressions translate per dimension before the single keywords.
Kernel-parameter pointer qualifiers are adjusted in a signature pass
(OpenCL kernel args need __global; CUDA args need no qualifier).

This is deliberately lexical, not a parser: the whole point of the table is
that a guarded search-and-replace suffices for kernel bodies.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

INFO = "info"
WARNING = "warning"
ERROR = "error"

TO_OPENCL = "opencl"
TO_CUDA = "cuda"

_DIMS = {"x": "0", "y": "1", "z": "2"}
_DIMS_INV = {v: k for k, v in _DIMS.items()}

# Human-readable mapping table (CUDA form, OpenCL form, bidirectional, note).
MAPPING_TABLE = (
    ("__global__", "__kernel", True, "function qualifier"),
    ("__device__ (function qualifier)", "", False, "no OpenCL qualifier; dropped"),
    ("__constant__", "__constant", True, "variable qualifier"),
    ("__device__ (variable qualifier)", "__global", False, "program-scope variable"),
    ("__shared__", "__local", True, "variable qualifier"),
    ("gridDim.D", "get_num_groups(d)", True, "indexing"),
    ("blockDim.D", "get_local_size(d)", True, "indexing"),
    ("blockIdx.D", "get_group_id(d)", True, "indexing"),
    ("threadIdx.D", "get_local_id(d)", True, "indexing"),
    ("blockIdx.D*blockDim.D+threadIdx.D", "get_global_id(d)", True, "indexing"),
    ("gridDim.D*blockDim.D", "get_global_size(d)", True, "indexing"),
    ("__syncthreads()", "barrier(CLK_LOCAL_MEM_FENCE)", True, "synchronization"),
    ("__threadfence()", "", False, "no OpenCL equivalent"),
    ("__threadfence_block()", "mem_fence(CLK_GLOBAL_MEM_FENCE | CLK_LOCAL_MEM_FENCE)",
     True, "synchronization"),
    ("kernel<<<...>>>()", "clEnqueueNDRangeKernel()", False, "host API; checklist only"),
    ("cudaGetDeviceProperties()", "clGetDeviceInfo()", False, "host API; checklist only"),
)


@dataclass(frozen=True)
class PortDiagnostic:
    severity: str
    line: int
    message: str
    checklist_item: int

    def format(self, filename: str = "<source>") -> str:
        return (f"{filename}:{self.line}: {self.severity}: {self.message} "
                f"[step {self.checklist_item}]")


@dataclass
class Translation:
    text: str
    diagnostics: list[PortDiagnostic] = field(default_factory=list)


# --- lexer --------------------------------------------------------------------

CODE = "code"
COMMENT = "comment"
STRING = "string"


def lex_spans(src: str) -> list[tuple[str, int, int]]:
    """(kind, start, end) spans covering the whole source."""
    spans = []
    i = 0
    n = len(src)
    start = 0

    def flush_code(end):
        if end > start:
            spans.append((CODE, start, end))

    while i < n:
        c = src[i]
        nxt = src[i + 1] if i + 1 < n else ""
        if c == "/" and nxt == "/":
            flush_code(i)
            j = src.find("\n", i)
            j = n if j == -1 else j
            spans.append((COMMENT, i, j))
            i = j
            start = i
        elif c == "/" and nxt == "*":
            flush_code(i)
            j = src.find("*/", i + 2)
            j = n if j == -1 else j + 2
            spans.append((COMMENT, i, j))
            i = j
            start = i
        elif c in "\"'":
            flush_code(i)
            j = i + 1
            while j < n:
                if src[j] == "\\":
                    j += 2
                    continue
                if src[j] == c:
                    j += 1
                    break
                j += 1
            else:
                j = n
            spans.append((STRING, i, j))
            i = j
            start = i
        else:
            i += 1
    flush_code(n)
    return spans


def _line_of(src: str, pos: int) -> int:
    return src.count("\n", 0, pos) + 1


# --- rewrite rules --------------------------------------------------------------

def _dim_sub(template: str):
    def repl(m: re.Match) -> str:
        d = m.group(1)
        if d in _DIMS:
            return template.format(_DIMS[d])
        return template.format(d)
    return repl


def _dimnum_sub(template: str):
    def repl(m: re.Match) -> str:
        return template.format(_DIMS_INV[m.group(1)])
    return repl


# (pattern, replacement, diagnostic) triples; diagnostics may be None.
_CUDA_TO_OPENCL = [
    # composite indexing first (both product orders, both addend orders)
    (re.compile(r"\bblockIdx\.([xyz])\s*\*\s*blockDim\.\1\s*\+\s*threadIdx\.\1\b"),
     _dim_sub("get_global_id({})"), None),
    (re.compile(r"\bblockDim\.([xyz])\s*\*\s*blockIdx\.\1\s*\+\s*threadIdx\.\1\b"),
     _dim_sub("get_global_id({})"), None),
    (re.compile(r"\bthreadIdx\.([xyz])\s*\+\s*blockIdx\.\1\s*\*\s*blockDim\.\1\b"),
     _dim_sub("get_global_id({})"), None),
    (re.compile(r"\bthreadIdx\.([xyz])\s*\+\s*blockDim\.\1\s*\*\s*blockIdx\.\1\b"),
     _dim_sub("get_global_id({})"), None),
    (re.compile(r"\bgridDim\.([xyz])\s*\*\s*blockDim\.\1\b"),
     _dim_sub("get_global_size({})"), None),
    (re.compile(r"\bblockDim\.([xyz])\s*\*\s*gridDim\.\1\b"),
     _dim_sub("get_global_size({})"), None),
    (re.compile(r"\bthreadIdx\.([xyz])\b"), _dim_sub("get_local_id({})"), None),
    (re.compile(r"\bblockIdx\.([xyz])\b"), _dim_sub("get_group_id({})"), None),
    (re.compile(r"\bblockDim\.([xyz])\b"), _dim_sub("get_local_size({})"), None),
    (re.compile(r"\bgridDim\.([xyz])\b"), _dim_sub("get_num_groups({})"), None),
    (re.compile(r"\b__syncthreads\s*\(\s*\)"), "barrier(CLK_LOCAL_MEM_FENCE)", None),
    (re.compile(r"\b__threadfence_block\s*\(\s*\)"),
     "mem_fence(CLK_GLOBAL_MEM_FENCE | CLK_LOCAL_MEM_FENCE)", None),
    (re.compile(r"\b__threadfence\s*\(\s*\)"), None,
     (WARNING, "__threadfence() has no OpenCL equivalent; left unchanged", 5)),
    (re.compile(r"\b__global__\b"), "__kernel", None),
    (re.compile(r"\b__shared__\b"), "__local", None),
    (re.compile(r"\b__constant__\b"), "__constant", None),
    (re.compile(r"\b__device__[ \t]?"), "",
     (INFO, "__device__ qualifier dropped (functions need no qualifier in OpenCL)", 5)),
]

_OPENCL_TO_CUDA = [
    (re.compile(r"\bget_global_id\s*\(\s*([012])\s*\)"),
     _dimnum_sub("blockIdx.{0}*blockDim.{0}+threadIdx.{0}"), None),
    (re.compile(r"\bget_global_size\s*\(\s*([012])\s*\)"),
     _dimnum_sub("gridDim.{0}*blockDim.{0}"), None),
    (re.compile(r"\bget_local_id\s*\(\s*([012])\s*\)"), _dimnum_sub("threadIdx.{0}"), None),
    (re.compile(r"\bget_group_id\s*\(\s*([012])\s*\)"), _dimnum_sub("blockIdx.{0}"), None),
    (re.compile(r"\bget_local_size\s*\(\s*([012])\s*\)"), _dimnum_sub("blockDim.{0}"), None),
    (re.compile(r"\bget_num_groups\s*\(\s*([012])\s*\)"), _dimnum_sub("gridDim.{0}"), None),
    (re.compile(r"\bbarrier\s*\(\s*CLK_LOCAL_MEM_FENCE\s*\)"), "__syncthreads()", None),
    (re.compile(r"\bbarrier\s*\(([^)]*)\)"), "__syncthreads()",
     (INFO, "barrier() fence scope narrowed to __syncthreads()", 5)),
    (re.compile(r"\bmem_fence\s*\(\s*CLK_GLOBAL_MEM_FENCE\s*\|\s*CLK_LOCAL_MEM_FENCE\s*\)"),
     "__threadfence_block()", None),
    (re.compile(r"\bmem_fence\s*\(([^)]*)\)"), "__threadfence_block()",
     (INFO, "mem_fence() argument dropped; mapped to __threadfence_block()", 5)),
    (re.compile(r"\b__kernel\b"), "__global__", None),
    (re.compile(r"\b__local\b"), "__shared__", None),
    (re.compile(r"\b__constant\b"), "__constant__", None),
]

_PORTABILITY_WARNINGS = [
    (re.compile(r"\btemplate\b|\btypename\b"),
     (WARNING, "C++ templates are not portable to OpenCL C", 5)),
    (re.compile(r"\bmake_(?:float|int|double|uint)[234]\b"),
     (WARNING, "vector constructors differ between CUDA and OpenCL", 5)),
    (re.compile(r"\b(?:float|int|double|uint)[234]\b"),
     (WARNING, "built-in vector types differ between CUDA and OpenCL", 5)),
]

_API_CALLS = [
    (re.compile(r"<<<"), "kernel<<<>>> launch syntax is host API; adjust the enqueue call"),
    (re.compile(r"\bcudaGetDeviceProperties\b"), "cudaGetDeviceProperties maps to clGetDeviceInfo"),
    (re.compile(r"\bclEnqueueNDRangeKernel\b"), "clEnqueueNDRangeKernel maps to kernel<<<>>>"),
    (re.compile(r"\bclGetDeviceInfo\b"), "clGetDeviceInfo maps to cudaGetDeviceProperties"),
]

_ADDRESS_SPACE = re.compile(r"\b(__global|__local|__constant|__private)\b")


def _apply_rules(src: str, rules) -> tuple[str, list[PortDiagnostic]]:
    spans = lex_spans(src)
    out = []
    diags: list[PortDiagnostic] = []
    for kind, a, b in spans:
        seg = src[a:b]
        if kind != CODE:
            out.append(seg)
            continue
        for rx, repl, diag in rules:
            if diag is not None:
                for m in rx.finditer(seg):
                    diags.append(PortDiagnostic(diag[0], _line_of(src, a) + seg.count("\n", 0, m.start()),
                                                diag[1], diag[2]))
            if repl is not None:
                seg = rx.sub(repl, seg)
        out.append(seg)
    return "".join(out), diags


def _split_params(paramtext: str) -> list[str]:
    parts = []
    depth = 0
    cur = ""
    for ch in paramtext:
        if ch in "(<[":
            depth += 1
        elif ch in ")>]":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append(cur)
            cur = ""
        else:
            cur += ch
    if cur.strip():
        parts.append(cur)
    return parts


def _kernel_param_pass(src: str, direction: str) -> tuple[str, list[PortDiagnostic]]:
    """Add (to OpenCL) or strip (to CUDA) __global on kernel pointer params."""
    qualifier = "__kernel" if direction == TO_OPENCL else "__global__"
    diags: list[PortDiagnostic] = []
    code_spans = [(a, b) for kind, a, b in lex_spans(src) if kind == CODE]

    def in_code(pos: int) -> bool:
        return any(a <= pos < b for a, b in code_spans)

    out = []
    pos = 0
    for m in re.finditer(r"\b%s\b" % re.escape(qualifier), src):
        if not in_code(m.start()):
            continue
        lp = src.find("(", m.end())
        if lp == -1:
            continue
        depth = 0
        rp = -1
        for k in range(lp, len(src)):
            if src[k] == "(":
                depth += 1
            elif src[k] == ")":
                depth -= 1
                if depth == 0:
                    rp = k
                    break
        if rp == -1:
            continue
        out.append(src[pos:lp + 1])
        params = _split_params(src[lp + 1:rp])
        fixed = []
        for param in params:
            stripped = param.strip()
            if direction == TO_OPENCL:
                if "*" in stripped and not _ADDRESS_SPACE.search(stripped):
                    lead = param[:len(param) - len(param.lstrip())]
                    param = f"{lead}__global {param.lstrip()}"
            else:
                if re.search(r"\b__global\b", param):
                    param = re.sub(r"\b__global[ \t]?", "", param)
            fixed.append(param)
        out.append(",".join(fixed))
        pos = rp
    out.append(src[pos:])
    return "".join(out), diags


def translate(source: str, direction: str) -> Translation:
    """Translate kernel source between the dialects; never fatal.

    Untranslatable constructs stay in place and become diagnostics.
    """
    if direction not in (TO_OPENCL, TO_CUDA):
        raise ValueError(f"direction must be {TO_OPENCL!r} or {TO_CUDA!r}")
    rules = _CUDA_TO_OPENCL if direction == TO_OPENCL else _OPENCL_TO_CUDA
    text, diags = _apply_rules(source, rules)
    text, more = _kernel_param_pass(text, direction)
    diags.extend(more)
    # Leftover OpenCL program-scope __global (not a kernel parameter).
    if direction == TO_CUDA:
        spans = lex_spans(text)
        out = []
        for kind, a, b in spans:
            seg = text[a:b]
            if kind == CODE and re.search(r"\b__global\b", seg):
                for m in re.finditer(r"\b__global\b", seg):
                    diags.append(PortDiagnostic(
                        INFO, _line_of(text, a) + seg.count("\n", 0, m.start()),
                        "program-scope __global mapped to __device__", 5))
                seg = re.sub(r"\b__global\b", "__device__", seg)
            out.append(seg)
        text = "".join(out)
    # Portability warnings (templates, vector built-ins) on the source side.
    for rx, diag in _PORTABILITY_WARNINGS:
        for kind, a, b in lex_spans(source):
            if kind != CODE:
                continue
            seg = source[a:b]
            for m in rx.finditer(seg):
                diags.append(PortDiagnostic(diag[0], _line_of(source, a) + seg.count("\n", 0, m.start()),
                                            diag[1], diag[2]))
    diags.sort(key=lambda d: (d.line, d.checklist_item, d.message))
    return Translation(text, diags)


_INDEXING_TOKENS = re.compile(
    r"\b(?:threadIdx|blockIdx|blockDim|gridDim)\.[xyz]\b"
    r"|\bget_(?:global_id|local_id|group_id|local_size|num_groups|global_size)\s*\(")
_KEYWORD_TOKENS = re.compile(
    r"\b(__global__|__kernel|__shared__|__local|__constant__|__constant|__device__"
    r"|__syncthreads|barrier|__threadfence_block|__threadfence|mem_fence)\b")
_KEYWORD_MAP = {
    "__global__": "__kernel", "__kernel": "__global__",
    "__shared__": "__local", "__local": "__shared__",
    "__constant__": "__constant", "__constant": "__constant__",
    "__device__": "(dropped)",
    "__syncthreads": "barrier", "barrier": "__syncthreads",
    "__threadfence_block": "mem_fence", "mem_fence": "__threadfence_block",
    "__threadfence": "(no equivalent)",
}


def checklist(source: str, direction: str) -> list[PortDiagnostic]:
    """Porting checklist findings, one group per applicable step.

    Steps: 1 imports, 2 API calls, 3 launch parameters, 4 kernel indexing,
    5 remaining keywords.  Host-side steps are informational reminders.
    """
    diags: list[PortDiagnostic] = []
    code = [(a, b) for kind, a, b in lex_spans(source) if kind == CODE]

    def code_matches(rx):
        for a, b in code:
            seg = source[a:b]
            for m in rx.finditer(seg):
                yield _line_of(source, a) + seg.count("\n", 0, m.start()), m

    for line, m in code_matches(re.compile(r"\bimport\s+(pycuda|pyopencl)\b")):
        other = "pyopencl" if m.group(1) == "pycuda" else "pycuda"
        diags.append(PortDiagnostic(INFO, line, f"import {other} instead of {m.group(1)}", 1))
    for rx, msg in _API_CALLS:
        for line, _ in code_matches(rx):
            diags.append(PortDiagnostic(INFO, line, msg, 2))
    has_kernel = bool(re.search(r"\b(__global__|__kernel)\b", source))
    if has_kernel:
        first = re.search(r"\b(__global__|__kernel)\b", source)
        diags.append(PortDiagnostic(
            INFO, _line_of(source, first.start()),
            "adjust launch parameters: block sizes for PyCUDA are 3D and global "
            "sizes are given in number of blocks, not total threads", 3))
    for line, m in code_matches(_INDEXING_TOKENS):
        diags.append(PortDiagnostic(INFO, line,
                                    f"indexing expression {m.group(0).rstrip('(').strip()} "
                                    "maps per dimension", 4))
    for line, m in code_matches(_KEYWORD_TOKENS):
        tok = m.group(1)
        diags.append(PortDiagnostic(INFO, line, f"{tok} maps to {_KEYWORD_MAP[tok]}", 5))
    diags.sort(key=lambda d: (d.line, d.checklist_item, d.message))
    return diags


def exit_code(diags: list[PortDiagnostic]) -> int:
    if any(d.severity == ERROR for d in diags):
        return 2
    if any(d.severity == WARNING for d in diags):
        return 1
    return 0

// Bindings over the subtok command-line tool. No tokenization logic lives
// here: every call shells out to the CLI, so outputs are element-for-element
// identical to what the tool itself produces for the same inputs and seeds.

import { spawnSync } from 'node:child_process';
import * as fs from 'node:fs';
import * as os from 'node:os';
import * as path from 'node:path';

/** Resolves the CLI command; override with SUBTOK_BIN="cmd arg1 arg2". */
function cliCommand(): string[] {
  const env = process.env.SUBTOK_BIN;
  if (env && env.trim().length > 0) return env.trim().split(/\s+/);
  return ['subtok'];
}

export class SubtokError extends Error {
  constructor(message: string, readonly exitCode: number | null) {
    super(message);
    this.name = new.target.name;
  }
}
/** Invalid parameters or flags (CLI exit code 2). */
export class SubtokConfigError extends SubtokError {}
/** Unreadable files or malformed input text (CLI exit code 1). */
export class SubtokIoError extends SubtokError {}
/** Model mismatch, unknown token or pairing failure (CLI exit code 3). */
export class SubtokModelError extends SubtokError {}
/** Misuse of the binding layer itself, e.g. a released handle. */
export class SubtokUsageError extends SubtokError {
  constructor(message: string) {
    super(message, null);
  }
}

function runCli(args: string[]): string {
  const [command, ...prefix] = cliCommand();
  const result = spawnSync(command, [...prefix, ...args], {
    encoding: 'utf-8',
    maxBuffer: 1 << 28,
  });
  if (result.error) {
    throw new SubtokIoError(`failed to launch ${command}: ${result.error.message}`, null);
  }
  if (result.status !== 0) {
    const diagnostic = (result.stderr || '').trim() || `exit code ${result.status}`;
    if (result.status === 2) throw new SubtokConfigError(diagnostic, result.status);
    if (result.status === 1) throw new SubtokIoError(diagnostic, result.status);
    throw new SubtokModelError(diagnostic, result.status ?? null);
  }
  return result.stdout;
}

export type ModelKind = 'bpe' | 'ulm';

/** Opaque reference to a loaded model file. Valid until release(). */
export class Handle {
  #released = false;
  private constructor(
    readonly modelPath: string,
    readonly kind: ModelKind,
  ) {}

  static load(modelPath: string): Handle {
    let header: string;
    try {
      const fd = fs.openSync(modelPath, 'r');
      try {
        const buf = Buffer.alloc(64);
        const n = fs.readSync(fd, buf, 0, buf.length, 0);
        header = buf.subarray(0, n).toString('utf-8').split('\n', 1)[0];
      } finally {
        fs.closeSync(fd);
      }
    } catch (err) {
      throw new SubtokIoError(`cannot read model file ${modelPath}: ${String(err)}`, null);
    }
    if (header.startsWith('subtok-bpe v1')) return new Handle(modelPath, 'bpe');
    if (header.startsWith('subtok-ulm v1')) return new Handle(modelPath, 'ulm');
    throw new SubtokModelError(`${modelPath}: unrecognized model header ${JSON.stringify(header)}`, null);
  }

  get released(): boolean {
    return this.#released;
  }

  release(): void {
    this.#released = true;
  }

  /** @internal */
  assertLive(): void {
    if (this.#released) {
      throw new SubtokUsageError(`handle for ${this.modelPath} has been released`);
    }
  }
}

export const loadModel = (modelPath: string): Handle => Handle.load(modelPath);

export type EncodeMode = 'deterministic' | 'dropout' | 'viterbi' | 'sample';

export interface EncodeOptions {
  mode?: EncodeMode;
  /** dropout probability, dropout mode only */
  p?: number;
  /** sampling temperature, sample mode only */
  alpha?: number;
  /** candidate-set size, sample mode only; Infinity samples the whole lattice */
  l?: number;
  seed?: number;
}

export interface Encoded {
  id: string;
  tokens: string[];
  ids: number[];
}

function withTempDir<T>(fn: (dir: string) => T): T {
  const dir = fs.mkdtempSync(path.join(os.tmpdir(), 'subtok-'));
  try {
    return fn(dir);
  } finally {
    fs.rmSync(dir, { recursive: true, force: true });
  }
}

function encodeArgs(handle: Handle, inputPath: string, options: EncodeOptions): string[] {
  const mode = options.mode ?? (handle.kind === 'bpe' ? 'deterministic' : 'viterbi');
  const seed = options.seed ?? 0;
  if (mode === 'deterministic' || mode === 'viterbi') {
    return ['encode', '--model', handle.modelPath, '--input', inputPath, '--format', 'both'];
  }
  if (mode === 'dropout') {
    return [
      'encode', '--model', handle.modelPath, '--input', inputPath, '--format', 'both',
      '--dropout', String(options.p ?? 0.1), '--seed', String(seed),
    ];
  }
  const l = options.l ?? Infinity;
  return [
    'sample', '--model', handle.modelPath, '--input', inputPath, '--format', 'both',
    '--alpha', String(options.alpha ?? 0.1), '--l', l === Infinity ? 'inf' : String(l),
    '--seed', String(seed),
  ];
}

function parseBoth(line: string): Encoded {
  const [id, tokenPart, idPart] = line.split('\t');
  return {
    id,
    tokens: tokenPart.length > 0 ? tokenPart.split(' ') : [],
    ids: idPart.length > 0 ? idPart.split(' ').map(Number) : [],
  };
}

/** Tokenize a batch of lines in one CLI call; one result per input line. */
export function encodeBatch(handle: Handle, lines: string[], options: EncodeOptions = {}): Encoded[] {
  handle.assertLive();
  return withTempDir((dir) => {
    const inputPath = path.join(dir, 'input.txt');
    fs.writeFileSync(inputPath, lines.map((l) => l + '\n').join(''), 'utf-8');
    const stdout = runCli(encodeArgs(handle, inputPath, options));
    const rows = stdout.split('\n').filter((l) => l.length > 0);
    return rows.map(parseBoth);
  });
}

/** Tokenize a single word or utterance: token strings plus token ids. */
export function encode(handle: Handle, text: string, options: EncodeOptions = {}): Encoded {
  const [result] = encodeBatch(handle, [text], options);
  return result;
}

export type StreamMode = 'deterministic-bpe' | 'bpe-dropout' | 'ulm-viterbi' | 'ulm-sample';

export interface StreamConfig {
  mode: StreamMode;
  epoch: number;
  seed?: number;
  p?: number;
  alpha?: number;
  l?: number;
  /** rows per yielded batch (default 256) */
  batchSize?: number;
}

export interface StreamRow {
  id: string;
  ids: number[];
}

/**
 * Materialize one training epoch and iterate it. Rows cross the boundary in
 * batches to keep per-utterance overhead off the hot path.
 */
export function* streamEpoch(
  handle: Handle,
  corpusPath: string,
  config: StreamConfig,
): Generator<StreamRow[], void, void> {
  handle.assertLive();
  const batchSize = config.batchSize ?? 256;
  if (batchSize < 1) throw new SubtokConfigError('batchSize must be >= 1', null);
  const lines = withTempDir((dir) => {
    const outPath = path.join(dir, 'epoch.ids');
    const args = [
      'stream', '--model', handle.modelPath, '--input', corpusPath,
      '--mode', config.mode, '--epoch', String(config.epoch),
      '--seed', String(config.seed ?? 0), '--output', outPath,
    ];
    if (config.p !== undefined) args.push('--dropout', String(config.p));
    if (config.alpha !== undefined) args.push('--alpha', String(config.alpha));
    if (config.l !== undefined) args.push('--l', config.l === Infinity ? 'inf' : String(config.l));
    runCli(args);
    return fs.readFileSync(outPath, 'utf-8').split('\n').filter((l) => l.length > 0);
  });
  for (let start = 0; start < lines.length; start += batchSize) {
    yield lines.slice(start, start + batchSize).map((line) => {
      const [id, idPart] = line.split('\t');
      return { id, ids: idPart.length > 0 ? idPart.split(' ').map(Number) : [] };
    });
  }
}

export interface TrainOptions {
  eowMark?: string;
  minPairCount?: number;
  shrinkFactor?: number;
  emSubiters?: number;
  maxPieceLen?: number;
  maxSeedSize?: number;
}

/** Train a model file via the CLI trainer; returns a live handle to it. */
export function train(
  kind: ModelKind,
  corpusPath: string,
  vocabSize: number,
  outputPath: string,
  options: TrainOptions = {},
): Handle {
  const args = [
    'train', kind, '--input', corpusPath, '--vocab-size', String(vocabSize),
    '--output', outputPath,
  ];
  if (options.eowMark !== undefined) args.push('--eow-mark', options.eowMark);
  if (options.minPairCount !== undefined) args.push('--min-pair-count', String(options.minPairCount));
  if (options.shrinkFactor !== undefined) args.push('--shrink-factor', String(options.shrinkFactor));
  if (options.emSubiters !== undefined) args.push('--em-subiters', String(options.emSubiters));
  if (options.maxPieceLen !== undefined) args.push('--max-piece-len', String(options.maxPieceLen));
  if (options.maxSeedSize !== undefined) args.push('--max-seed-size', String(options.maxSeedSize));
  runCli(args);
  return Handle.load(outputPath);
}

export interface ScoreReport {
  werPercent: number;
  cerPercent: number;
  tp: number;
  fp: number;
  fn: number;
  precision: number;
  recall: number;
  fscore: number;
  /** present when the references contain no OOV words */
  note?: string;
  /** every key-value pair exactly as the CLI printed it */
  raw: Record<string, string>;
}

/** WER/CER and OOV precision/recall/F-score for a ref/hyp transcript pair. */
export function score(trainPath: string, refPath: string, hypPath: string): ScoreReport {
  const stdout = runCli(['score', '--train', trainPath, '--ref', refPath, '--hyp', hypPath]);
  const raw: Record<string, string> = {};
  for (const line of stdout.split('\n')) {
    if (!line) continue;
    const [key, value] = line.split('\t');
    raw[key] = value;
  }
  return {
    werPercent: Number(raw['wer_percent']),
    cerPercent: Number(raw['cer_percent']),
    tp: Number(raw['tp']),
    fp: Number(raw['fp']),
    fn: Number(raw['fn']),
    precision: Number(raw['precision']),
    recall: Number(raw['recall']),
    fscore: Number(raw['fscore']),
    note: raw['note'],
    raw,
  };
}

/** Tool and model-format versions reported by the CLI. */
export function version(): string {
  return runCli(['version']).trim();
}

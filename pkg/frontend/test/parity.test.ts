// Byte-for-byte parity between the binding layer and direct CLI invocation,
// plus handle lifecycle and error-surface checks.

import { spawnSync } from 'node:child_process';
import * as fs from 'node:fs';
import * as os from 'node:os';
import * as path from 'node:path';
import { afterAll, beforeAll, describe, expect, it } from 'vitest';

import {
  Handle,
  SubtokConfigError,
  SubtokModelError,
  SubtokUsageError,
  encode,
  encodeBatch,
  loadModel,
  score,
  streamEpoch,
  train,
  version,
} from '../src/index.js';

const STEMS = ['tala', 'miru', 'kove', 'sendi', 'parla', 'vento', 'gira', 'luma'];
const SUFFIXES = ['', 's', 'ta', 'no', 'lin', 'dor'];

// small deterministic LCG so the corpus is identical on every run
function lcg(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (Math.imul(state, 1664525) + 1013904223) >>> 0;
    return state / 2 ** 32;
  };
}

function makeCorpus(seed: number, nTokens: number): string {
  const rand = lcg(seed);
  const pick = <T>(items: T[]): T => items[Math.floor(rand() * items.length)];
  const lines: string[] = [];
  let produced = 0;
  while (produced < nTokens) {
    const count = 3 + Math.floor(rand() * 6);
    const words: string[] = [];
    for (let i = 0; i < count; i++) words.push(pick(STEMS) + pick(SUFFIXES));
    lines.push(words.join(' '));
    produced += count;
  }
  return lines.map((l) => l + '\n').join('');
}

function runCliRaw(args: string[]): string {
  const bin = (process.env.SUBTOK_BIN ?? 'subtok').trim().split(/\s+/);
  const result = spawnSync(bin[0], [...bin.slice(1), ...args], {
    encoding: 'utf-8',
    maxBuffer: 1 << 28,
  });
  expect(result.error).toBeUndefined();
  expect(result.status).toBe(0);
  return result.stdout;
}

let dir: string;
let corpusPath: string;
let wordsPath: string;
let words: string[];
let bpe: Handle;
let ulm: Handle;

beforeAll(() => {
  dir = fs.mkdtempSync(path.join(os.tmpdir(), 'subtok-parity-'));
  corpusPath = path.join(dir, 'corpus.txt');
  const text = makeCorpus(42, 1500);
  fs.writeFileSync(corpusPath, text, 'utf-8');

  const distinct = [...new Set(text.split(/\s+/).filter((w) => w.length > 0))].sort();
  words = distinct.slice(0, 100);
  while (words.length < 100) words.push(distinct[words.length % distinct.length]);
  wordsPath = path.join(dir, 'words.txt');
  fs.writeFileSync(wordsPath, words.map((w) => w + '\n').join(''), 'utf-8');

  bpe = train('bpe', corpusPath, 120, path.join(dir, 'model.bpe'));
  ulm = train('ulm', corpusPath, 40, path.join(dir, 'model.ulm'), { maxSeedSize: 400 });
}, 120_000);

afterAll(() => {
  fs.rmSync(dir, { recursive: true, force: true });
});

function canonical(rows: { id: string; tokens: string[]; ids: number[] }[]): string {
  return rows.map((r) => `${r.id}\t${r.tokens.join(' ')}\t${r.ids.join(' ')}\n`).join('');
}

describe('binding/CLI parity', () => {
  it('deterministic encode of 100 corpus words is byte-identical to the CLI', () => {
    const viaBinding = canonical(encodeBatch(bpe, words));
    const viaCli = runCliRaw([
      'encode', '--model', bpe.modelPath, '--input', wordsPath, '--format', 'both',
    ]);
    expect(viaBinding).toBe(viaCli);
  });

  it('dropout encode with a fixed seed is byte-identical to the CLI', () => {
    const viaBinding = canonical(encodeBatch(bpe, words, { mode: 'dropout', p: 0.1, seed: 3 }));
    const viaCli = runCliRaw([
      'encode', '--model', bpe.modelPath, '--input', wordsPath, '--format', 'both',
      '--dropout', '0.1', '--seed', '3',
    ]);
    expect(viaBinding).toBe(viaCli);
  });

  it('ulm sampling with a fixed seed is byte-identical to the CLI', () => {
    const viaBinding = canonical(
      encodeBatch(ulm, words, { mode: 'sample', alpha: 0.5, l: Infinity, seed: 11 }),
    );
    const viaCli = runCliRaw([
      'sample', '--model', ulm.modelPath, '--input', wordsPath, '--format', 'both',
      '--alpha', '0.5', '--l', 'inf', '--seed', '11',
    ]);
    expect(viaBinding).toBe(viaCli);
  });

  it('one full epoch stream (seed 7) is byte-identical to the CLI output file', () => {
    const rows: string[] = [];
    for (const batch of streamEpoch(bpe, corpusPath, {
      mode: 'bpe-dropout', epoch: 3, seed: 7, p: 0.1, batchSize: 64,
    })) {
      for (const row of batch) rows.push(`${row.id}\t${row.ids.join(' ')}\n`);
    }
    const outPath = path.join(dir, 'cli-epoch.ids');
    runCliRaw([
      'stream', '--model', bpe.modelPath, '--input', corpusPath, '--mode', 'bpe-dropout',
      '--dropout', '0.1', '--epoch', '3', '--seed', '7', '--output', outPath,
    ]);
    expect(rows.join('')).toBe(fs.readFileSync(outPath, 'utf-8'));
  });

  it('score report matches the CLI key-value document', () => {
    const refPath = path.join(dir, 'ref.txt');
    const hypPath = path.join(dir, 'hyp.txt');
    fs.writeFileSync(refPath, makeCorpus(77, 120), 'utf-8');
    const hyp = makeCorpus(77, 120).replace('tala', 'miru');
    fs.writeFileSync(hypPath, hyp, 'utf-8');
    const report = score(corpusPath, refPath, hypPath);
    const viaCli = runCliRaw(['score', '--train', corpusPath, '--ref', refPath, '--hyp', hypPath]);
    const kv: Record<string, string> = {};
    for (const line of viaCli.split('\n')) {
      if (!line) continue;
      const [key, value] = line.split('\t');
      kv[key] = value;
    }
    expect(report.raw).toEqual(kv);
    expect(report.werPercent).toBe(Number(kv['wer_percent']));
    expect(report.fscore).toBe(Number(kv['fscore']));
  });
});

describe('behaviour', () => {
  it('p=1 dropout splits every word into single characters', () => {
    const encoded = encodeBatch(bpe, words.slice(0, 20), { mode: 'dropout', p: 1, seed: 0 });
    for (const [i, row] of encoded.entries()) {
      const stripped = row.tokens.map((t) => (t.endsWith('</w>') ? t.slice(0, -4) : t));
      expect(stripped.every((t) => t.length === 1)).toBe(true);
      expect(stripped.join('')).toBe(words[i]);
    }
  });

  it('single-text encode returns tokens and ids of equal length', () => {
    const row = encode(bpe, words[0]);
    expect(row.tokens.length).toBeGreaterThan(0);
    expect(row.ids.length).toBe(row.tokens.length);
  });

  it('version reports the model format versions', () => {
    const text = version();
    expect(text).toContain('subtok-bpe v1');
    expect(text).toContain('subtok-ulm v1');
  });
});

describe('lifecycle and errors', () => {
  it('a released handle fails cleanly and stays released', () => {
    const handle = loadModel(bpe.modelPath);
    expect(handle.kind).toBe('bpe');
    handle.release();
    expect(() => encode(handle, 'tala')).toThrow(SubtokUsageError);
    expect(() => [...streamEpoch(handle, corpusPath, { mode: 'deterministic-bpe', epoch: 1 })])
      .toThrow(SubtokUsageError);
    expect(handle.released).toBe(true);
    // other handles over the same file are unaffected
    expect(encode(bpe, 'tala').tokens.length).toBeGreaterThan(0);
  });

  it('core configuration errors surface as typed exceptions with diagnostics', () => {
    expect(() => train('bpe', corpusPath, 1, path.join(dir, 'bad.bpe')))
      .toThrow(SubtokConfigError);
    try {
      train('bpe', corpusPath, 1, path.join(dir, 'bad.bpe'));
    } catch (err) {
      expect(String(err)).toContain('below the character vocabulary');
    }
  });

  it('loading a non-model file raises a model error', () => {
    const junk = path.join(dir, 'junk.txt');
    fs.writeFileSync(junk, 'hello\n', 'utf-8');
    expect(() => Handle.load(junk)).toThrow(SubtokModelError);
  });
});

import { beforeEach, describe, expect, it } from 'vitest';

import { ApiClient } from '../src/api';
import { ChatPanel } from '../src/chat';
import { initialState, reduce, type ChatEvent } from '../src/state';
import { MockServer, askOk } from './mock';

let root: HTMLElement;
let server: MockServer;
let panel: ChatPanel;

beforeEach(() => {
  document.body.innerHTML = '<div id="root"></div>';
  root = document.getElementById('root')!;
  server = new MockServer();
  panel = new ChatPanel(root, new ApiClient('http://mock', server.fetch));
});

const bubbles = () => [...root.querySelectorAll('.bubble')];

describe('chat transcript', () => {
  it('renders user and assistant bubbles in order', async () => {
    server.on('/v1/ask', askOk('Rest and drink fluids.'));
    await panel.sendQuestion('what helps a fever');
    const rendered = bubbles();
    expect(rendered).toHaveLength(2);
    expect(rendered[0].className).toContain('user');
    expect(rendered[0].querySelector('p')!.textContent).toBe('what helps a fever');
    expect(rendered[1].className).toContain('assistant');
    expect(rendered[1].querySelector('p')!.textContent).toBe('Rest and drink fluids.');
  });

  it('renders the answer byte-equal to the mock payload', async () => {
    const answer = 'Exact  spacing\tand "quotes" <kept> & preserved.';
    server.on('/v1/ask', askOk(answer));
    await panel.sendQuestion('q');
    expect(bubbles()[1].querySelector('p')!.textContent).toBe(answer);
  });

  it('renders the disclaimer with every answer', async () => {
    server.on('/v1/ask', askOk('Answer one.'));
    await panel.sendQuestion('q1');
    server.on('/v1/ask', askOk('Answer two.'));
    await panel.sendQuestion('q2');
    expect(root.querySelectorAll('.disclaimer')).toHaveLength(2);
  });

  it('escapes markup in server text instead of interpreting it', async () => {
    server.on('/v1/ask', askOk('<img src=x onerror="window.__pwned=1"><b>bold</b>'));
    await panel.sendQuestion('inject');
    expect(root.querySelector('img')).toBeNull();
    expect(root.querySelector('b')).toBeNull();
    expect((window as never as Record<string, unknown>).__pwned).toBeUndefined();
    expect(bubbles()[1].querySelector('p')!.textContent).toContain('<img');
  });

  it('sends the selected language', async () => {
    panel.dispatch({ type: 'select-lang', lang: 'es' });
    server.on('/v1/ask', askOk('ok'));
    await panel.sendQuestion('hola');
    expect(server.calls[0].body).toMatchObject({ question: 'hola', lang: 'es' });
  });
});

describe('in-flight handling', () => {
  it('blocks a second submit while the first is in flight', async () => {
    server.on('/v1/ask', { ...askOk('Slow answer.'), delayMs: 30 });
    const first = panel.sendQuestion('first question');
    await panel.sendQuestion('second question'); // should be a no-op
    await first;
    expect(server.calls.filter((c) => c.path === '/v1/ask')).toHaveLength(1);
    expect(bubbles()).toHaveLength(2);
    expect(bubbles()[0].querySelector('p')!.textContent).toBe('first question');
  });

  it('disables the button while pending', async () => {
    server.on('/v1/ask', { ...askOk('ok'), delayMs: 20 });
    const inFlight = panel.sendQuestion('q');
    expect(root.querySelector('button[type=submit]')!.hasAttribute('disabled')).toBe(true);
    await inFlight;
    expect(root.querySelector('button[type=submit]')!.hasAttribute('disabled')).toBe(false);
  });
});

describe('error handling', () => {
  it('shows an inline error on 422 and preserves the input', async () => {
    server.on('/v1/ask', {
      status: 422,
      body: { error_code: 'unsupported_language', message: 'unsupported language pair xx->en' },
    });
    await panel.sendQuestion('hola', 'xx');
    const banner = root.querySelector('.error-banner');
    expect(banner).not.toBeNull();
    expect(banner!.textContent).toContain('unsupported language pair');
    const input = root.querySelector('input.question-input') as HTMLInputElement;
    expect(input.value).toBe('hola'); // input preserved for retry
    expect(bubbles()).toHaveLength(0); // no phantom transcript entries
  });

  it('shows a retry banner on network failure', async () => {
    await panel.sendQuestion('no route configured');
    expect(root.querySelector('.error-banner')!.textContent).toContain('retry');
  });
});

describe('source panel', () => {
  const hits = [
    { answer_id: 'a1', score: 1.23456, text: 'First source text.' },
    { answer_id: 'a2', score: 0.5, text: 'Second source text.' },
  ];

  it('shows scores to 3 decimals in received order when expanded', async () => {
    server.on('/v1/ask', askOk('Answer.', hits));
    await panel.sendQuestion('q');
    (root.querySelector('.sources-toggle') as HTMLButtonElement).click();
    const scores = [...root.querySelectorAll('.source-score')].map((s) => s.textContent);
    expect(scores).toEqual(['1.235', '0.500']);
    const texts = [...root.querySelectorAll('.source-text')].map((s) => s.textContent);
    expect(texts).toEqual(['First source text.', 'Second source text.']);
  });

  it('collapses again on second click', async () => {
    server.on('/v1/ask', askOk('Answer.', hits));
    await panel.sendQuestion('q');
    const toggle = () => (root.querySelector('.sources-toggle') as HTMLButtonElement).click();
    toggle();
    expect(root.querySelectorAll('.source-item')).toHaveLength(2);
    toggle();
    expect(root.querySelectorAll('.source-item')).toHaveLength(0);
  });
});

describe('state replay', () => {
  it('replaying an event log reproduces the same transcript', () => {
    const log: ChatEvent[] = [
      { type: 'session', sessionId: 's1' },
      { type: 'submit', text: 'q one' },
      { type: 'answer', text: 'a one', hits: [], disclaimer: 'd' },
      { type: 'submit', text: 'q two' },
      { type: 'failure', message: 'boom' },
      { type: 'submit', text: 'q two again' },
      { type: 'answer', text: 'a two', hits: [], disclaimer: 'd' },
    ];
    const run = () => log.reduce(reduce, initialState('en'));
    expect(run()).toEqual(run());
    const transcript = run().messages.map((m) => [m.role, m.text]);
    expect(transcript).toEqual([
      ['user', 'q one'],
      ['assistant', 'a one'],
      ['user', 'q two again'],
      ['assistant', 'a two'],
    ]);
  });
});

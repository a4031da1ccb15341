import { beforeEach, describe, expect, it } from 'vitest';

import { ApiClient } from '../src/api';
import { SummaryPanel } from '../src/summary';
import { MockServer } from './mock';

let root: HTMLElement;
let server: MockServer;
let panel: SummaryPanel;

beforeEach(() => {
  document.body.innerHTML = '<div id="root"></div>';
  root = document.getElementById('root')!;
  server = new MockServer();
  panel = new SummaryPanel(root, new ApiClient('http://mock', server.fetch));
});

describe('summary panel', () => {
  it('renders summary sentences as an ordered list', async () => {
    server.on('/v1/summarize', {
      status: 200,
      body: { summary_sentences: ['First finding.', 'Second finding.'], k_used: 2 },
    });
    await panel.loadSummary('p1');
    const items = [...root.querySelectorAll('ol li')].map((li) => li.textContent);
    expect(items).toEqual(['First finding.', 'Second finding.']);
    expect(server.calls[0].body).toMatchObject({ patient_id: 'p1' });
  });

  it('shows the empty state on 404', async () => {
    server.on('/v1/summarize', {
      status: 404,
      body: { error_code: 'unknown_patient', message: 'no documents for patient p9' },
    });
    await panel.loadSummary('p9');
    expect(root.querySelector('.empty-state')!.textContent).toBe('No records for this patient.');
    expect(root.querySelector('ol')).toBeNull();
  });

  it('shows a retry message on other errors', async () => {
    server.on('/v1/summarize', { status: 503, body: { error_code: 'x', message: 'down' } });
    await panel.loadSummary('p1');
    expect(root.querySelector('.empty-state')!.textContent).toContain('retry');
  });

  it('escapes markup in summary sentences', async () => {
    server.on('/v1/summarize', {
      status: 200,
      body: { summary_sentences: ['<script>window.__pwned=1</script> note.'], k_used: 1 },
    });
    await panel.loadSummary('p1');
    expect(root.querySelector('script')).toBeNull();
    expect(root.querySelector('ol li')!.textContent).toContain('<script>');
  });
});

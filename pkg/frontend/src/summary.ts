// EHR summary panel for clinicians: fetches the extractive summary of a
// patient's stored consultation notes and renders the ordered sentences.

import { ApiClient, ApiRequestError } from './api';

export class SummaryPanel {
  constructor(
    private readonly root: HTMLElement,
    private readonly api: ApiClient,
  ) {
    this.renderEmpty('Enter a patient id to load a summary.');
  }

  async loadSummary(patientId: string): Promise<void> {
    if (!patientId.trim()) return;
    try {
      const response = await this.api.summarize(patientId);
      this.root.textContent = '';
      const list = document.createElement('ol');
      list.className = 'summary-list';
      for (const sentence of response.summary_sentences) {
        const item = document.createElement('li');
        item.textContent = sentence;
        list.appendChild(item);
      }
      this.root.appendChild(list);
    } catch (err) {
      if (err instanceof ApiRequestError && err.status === 404) {
        this.renderEmpty('No records for this patient.');
      } else {
        this.renderEmpty('Could not load the summary, please retry.');
      }
    }
  }

  private renderEmpty(message: string): void {
    this.root.textContent = '';
    const empty = document.createElement('p');
    empty.className = 'empty-state';
    empty.textContent = message;
    this.root.appendChild(empty);
  }
}

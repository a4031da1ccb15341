import { ApiClient } from './api';
import { ChatPanel } from './chat';
import { SummaryPanel } from './summary';

const baseUrl =
  new URLSearchParams(window.location.search).get('api') ??
  'http://127.0.0.1:8080';

const api = new ApiClient(baseUrl);

const chatRoot = document.getElementById('chat');
const summaryRoot = document.getElementById('summary');
if (chatRoot && summaryRoot) {
  const chat = new ChatPanel(chatRoot, api);
  void chat.startSession();
  const summary = new SummaryPanel(summaryRoot, api);
  const form = document.getElementById('patient-form') as HTMLFormElement | null;
  form?.addEventListener('submit', (event) => {
    event.preventDefault();
    const input = document.getElementById('patient-id') as HTMLInputElement;
    void summary.loadSummary(input.value);
  });
}
